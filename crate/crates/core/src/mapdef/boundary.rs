use serde::Serialize;

use super::AreaMap;
use crate::error::{Error, Result};
use crate::surface::{pt, Point};

const GRID: usize = 32;
const RIGID_TOL: f64 = 1e-9;
const MIN_BAND: f64 = 1e-3;

/// Rotation numbers of the two boundary circles and the widths of the
/// bands next to them on which the map acts as a rotation of each circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryRotations {
    /// θ₀, at the bottom of the radial range.
    pub theta_lower: f64,
    /// θ₁, at the top of the radial range.
    pub theta_upper: f64,
    /// Width of the band where every circle `x = const` is rotated rigidly.
    pub band_lower: f64,
    pub band_upper: f64,
    /// Width of the band where the whole band is one rigid rotation.
    pub strict_lower: f64,
    pub strict_upper: f64,
}

struct BandTest {
    theta: f64,
    rotational: bool,
    strict: bool,
}

/// Samples a band of width `w` starting at `edge` (extending in direction
/// `dir`) on a 32x32 grid.
fn test_band(map: &dyn AreaMap, edge: f64, dir: f64, w: f64) -> Result<BandTest> {
    let mut theta = f64::NAN;
    let mut rotational = true;
    let mut strict = true;
    for i in 0..GRID {
        let x = edge + dir * w * i as f64 / (GRID - 1) as f64;
        let mut first = f64::NAN;
        for j in 0..GRID {
            let p: Point = pt(x, j as f64 / GRID as f64);
            let q = map.lift(&p)?;
            if (q.x - p.x).abs() >= RIGID_TOL {
                return Ok(BandTest { theta, rotational: false, strict: false });
            }
            let d = q.y - p.y;
            if j == 0 {
                first = d;
                if i == 0 {
                    theta = d;
                }
            }
            if (d - first).abs() >= RIGID_TOL {
                rotational = false;
            }
            if (d - theta).abs() >= RIGID_TOL {
                strict = false;
            }
        }
        if !rotational {
            break;
        }
    }
    Ok(BandTest { theta, rotational, strict })
}

fn scan(map: &dyn AreaMap, edge: f64, dir: f64, max_w: f64, side: &'static str) -> Result<(f64, f64, f64)> {
    let mut w = MIN_BAND.min(max_w);
    let mut theta = f64::NAN;
    let (mut band, mut strict_band) = (0.0, 0.0);
    let mut strict_open = true;
    loop {
        let t = test_band(map, edge, dir, w)?;
        if !t.rotational {
            break;
        }
        theta = t.theta;
        band = w;
        if strict_open && t.strict {
            strict_band = w;
        } else {
            strict_open = false;
        }
        if w >= max_w {
            break;
        }
        w = (2.0 * w).min(max_w);
    }
    if band < MIN_BAND.min(max_w) {
        return Err(Error::NotRigidNearBoundary {
            side,
            detail: format!("no band of width {MIN_BAND} acts as a rotation of each circle within {RIGID_TOL}"),
        });
    }
    Ok((theta, band, strict_band))
}

/// Finds θ₀, θ₁ by scanning inward from both boundaries with doubling band
/// widths, starting at 1e-3 and stopping at half the radial width.
pub fn detect_boundary_rotations(map: &dyn AreaMap) -> Result<BoundaryRotations> {
    let (lo, hi) = map.chart().radial_range();
    let half = 0.5 * (hi - lo);
    let (theta_lower, band_lower, strict_lower) = scan(map, lo, 1.0, half, "inner")?;
    let (theta_upper, band_upper, strict_upper) = scan(map, hi, -1.0, half, "outer")?;
    Ok(BoundaryRotations { theta_lower, theta_upper, band_lower, band_upper, strict_lower, strict_upper })
}

#[cfg(test)]
mod tests {
    use super::super::{parse_map, MapDefinition};
    use super::*;
    use crate::surface::Chart;

    #[test]
    fn twist_on_unit_annulus() {
        let m = MapDefinition::twist(Chart::annulus(0.0, 1.0).unwrap(), 1.0, 0.0);
        let b = detect_boundary_rotations(&m).unwrap();
        assert_eq!(b.theta_lower, 0.0);
        assert_eq!(b.theta_upper, 1.0);
        assert_eq!(b.band_upper, 0.5);
        assert!(b.strict_upper < 1e-3);
    }

    #[test]
    fn twist_on_symmetric_annulus() {
        let (a1, a0) = (0.75, 0.25);
        let m = MapDefinition::twist(Chart::annulus(-1.0, 1.0).unwrap(), a1, a0);
        let b = detect_boundary_rotations(&m).unwrap();
        assert!((b.theta_lower - (-a1 + a0)).abs() < 1e-15);
        assert!((b.theta_upper - (a1 + a0)).abs() < 1e-15);
    }

    #[test]
    fn rotation_is_strictly_rigid() {
        let b = detect_boundary_rotations(&MapDefinition::rotation(0.3)).unwrap();
        assert_eq!((b.theta_lower, b.theta_upper), (0.3, 0.3));
        assert_eq!(b.strict_lower, 0.5);
    }

    #[test]
    fn bump_near_the_edge_is_refused() {
        // A flow whose support touches the inner boundary circle.
        let m = parse_map("hamiltonian_flow(0.01*sin(2*pi*y)*(1-x)^3, 1, 0.05) on annulus[0,1]").unwrap();
        let err = detect_boundary_rotations(&m).unwrap_err();
        assert!(matches!(err, Error::NotRigidNearBoundary { side: "inner", .. }));
    }
}
