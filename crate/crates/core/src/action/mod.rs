//! Action functions `g` with `f*β − β = dg`, the Calabi invariant (mean
//! action of the area measure), flux, and the identities relating them.

mod checks;

pub use checks::{action_difference_check, composition_additivity_check, exact_shift_check};

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mapdef::{detect_boundary_rotations, Anchor, AreaMap, BoundaryRotations, NormValue, Normalization};
use crate::surface::quadrature::{integrate, integrate_2d};
use crate::surface::{integrate_one_form, pt, wrap_half, Chart, CoverPath, Point, PrimitiveForm};

/// Default tolerance for line and area integrals.
pub const DEFAULT_TOL: f64 = 1e-9;

/// The action function of a map for a primitive form, pinned by a
/// normalization. Values are computed by integrating `f*β − β` from the
/// anchor: first along the anchor's circle to the nearest image of the
/// target angle, then radially.
#[derive(Clone)]
pub struct ActionField {
    map: Arc<dyn AreaMap>,
    form: PrimitiveForm,
    normalization: Normalization,
    chart: Chart,
    anchor: Point,
    anchor_value: f64,
    tol: f64,
}

impl std::fmt::Debug for ActionField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ActionField")
            .field("form", &self.form)
            .field("normalization", &self.normalization)
            .field("anchor", &self.anchor)
            .field("anchor_value", &self.anchor_value)
            .finish()
    }
}

impl ActionField {
    pub fn new(map: Arc<dyn AreaMap>, form: PrimitiveForm, normalization: Normalization, tol: f64) -> Result<Self> {
        let chart = map.chart();
        if !form.fits(&chart) {
            return Err(Error::InvalidInput(format!("form {} does not live on {}", form.name(), chart.describe())));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
        }
        let (lo, hi) = chart.radial_range();
        let anchor = match normalization.anchor {
            Anchor::Outer => pt(hi, 0.0),
            Anchor::Inner => pt(lo, 0.0),
            Anchor::Point(p) => {
                chart.check(&p)?;
                p
            }
        };
        let anchor_value = match normalization.value {
            NormValue::Value(v) => v,
            NormValue::Theta => {
                let b = detect_boundary_rotations(map.as_ref())?;
                match normalization.anchor {
                    Anchor::Outer => b.theta_upper,
                    Anchor::Inner => b.theta_lower,
                    Anchor::Point(_) => {
                        return Err(Error::InvalidInput("a point anchor needs a numeric value".into()));
                    }
                }
            }
        };
        Ok(Self { map, form, normalization, chart, anchor, anchor_value, tol })
    }

    /// `β₀` or `β_D`, pinned at the outer boundary to its rotation number.
    pub fn standard(map: Arc<dyn AreaMap>) -> Result<Self> {
        let form = map.chart().standard_form();
        Self::new(map, form, Normalization::default(), DEFAULT_TOL)
    }

    pub fn map(&self) -> &Arc<dyn AreaMap> {
        &self.map
    }

    pub fn form(&self) -> &PrimitiveForm {
        &self.form
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn anchor(&self) -> (Point, f64) {
        (self.anchor, self.anchor_value)
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Coefficients of `f*β − β` at a cover point.
    pub fn phi(&self, p: &Point) -> Result<(f64, f64)> {
        let (q, j) = self.map.lift_jac(p)?;
        Ok(self.form.pullback_difference(p, &q, &j))
    }

    /// The deterministic path used for `g(p)`.
    pub fn path_to(&self, p: &Point) -> CoverPath {
        let y = self.anchor.y + wrap_half(p.y - self.anchor.y);
        CoverPath::polyline(&[self.anchor, pt(self.anchor.x, y), pt(p.x, y)])
    }

    /// `g(p)`.
    pub fn value(&self, p: &Point) -> Result<f64> {
        self.chart.check(p)?;
        let path = self.path_to(p);
        Ok(self.anchor_value + self.integrate_phi(&path)?)
    }

    /// `∫_path (f*β − β)`.
    pub fn integrate_phi(&self, path: &CoverPath) -> Result<f64> {
        integrate_one_form(path, &self.chart, self.tol, |q| self.phi(q))
    }

    /// Mean of `g` over the chart's area measure.
    pub fn calabi(&self, tol: f64) -> Result<f64> {
        let (lo, hi) = self.chart.radial_range();
        let total = self.chart.total_area();
        Ok(self.area_integral(lo, hi, tol * total)? / total)
    }

    /// `∫∫ g ω` over the band `s0 ≤ radial ≤ s1`.
    ///
    /// Rather than evaluating `g` pointwise, the integral is rewritten by
    /// exchanging the order of integration: the angular leg of the path
    /// becomes a weighted line integral along the anchor circle and the
    /// radial leg a weighted area integral of `φ_x`.
    pub fn area_integral(&self, s0: f64, s1: f64, tol: f64) -> Result<f64> {
        let m = |s: f64| self.chart.cumulative_area(s);
        let band = m(s1) - m(s0);
        let (xa, ya) = (self.anchor.x, self.anchor.y);
        let (t0, t1) = (ya - 0.5, ya + 0.5);
        let angular = integrate(
            |t| {
                let w = if t > ya { t1 - t } else { t0 - t };
                Ok(self.phi(&pt(xa, t))?.1 * w)
            },
            t0,
            t1,
            tol * 0.25 / band.max(1e-300),
        )?;
        let weight = |s: f64| {
            if s > xa {
                if s < s1 {
                    m(s1) - m(s.max(s0))
                } else {
                    0.0
                }
            } else if s > s0 {
                -(m(s.min(s1)) - m(s0))
            } else {
                0.0
            }
        };
        let mut cuts = vec![s0.min(xa), s0, s1, xa, s1.max(xa)];
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut radial = 0.0;
        for w in cuts.windows(2) {
            if w[1] > w[0] {
                radial += integrate_2d(|s, t| Ok(self.phi(&pt(s, t))?.0 * weight(s)), (w[0], w[1]), (t0, t1), tol * 0.25)?;
            }
        }
        Ok(band * (self.anchor_value + angular) + radial)
    }

    /// Average of `g` over a finite set of points (an orbit measure).
    pub fn mean_over(&self, points: &[Point]) -> Result<f64> {
        if points.is_empty() {
            return Err(Error::InvalidInput("empty point set".into()));
        }
        let mut s = 0.0;
        for p in points {
            s += self.value(p)?;
        }
        Ok(s / points.len() as f64)
    }

    /// Time average of `g` along `n` iterates starting at `start`.
    pub fn birkhoff_mean(&self, start: &Point, n: usize) -> Result<f64> {
        let mut chain = ActionChain::new(self);
        let mut p = *start;
        let mut s = 0.0;
        for _ in 0..n {
            s += chain.value(&p)?;
            p = self.map.lift(&p)?;
        }
        Ok(s / n as f64)
    }

    /// Mean action of one of the supported invariant measures.
    pub fn mean_action(&self, measure: &Measure) -> Result<f64> {
        match measure {
            Measure::Orbit(points) => self.mean_over(points),
            Measure::Lebesgue => self.calabi(self.tol),
            Measure::Birkhoff { start, n } => self.birkhoff_mean(start, *n),
        }
    }
}

/// Evaluates `g` along a stream of points (an orbit), integrating `φ` over a
/// short segment from the nearest recently evaluated point when one is
/// close, and from the anchor otherwise. A value is never more than
/// `MAX_DEPTH` segments away from an anchor evaluation.
pub struct ActionChain<'a> {
    field: &'a ActionField,
    /// `(point, g, segments since an anchor evaluation)`.
    recent: std::collections::VecDeque<(Point, f64, usize)>,
}

impl<'a> ActionChain<'a> {
    const RECENT: usize = 8;
    const REACH: f64 = 0.05;
    const MAX_DEPTH: usize = 64;

    pub fn new(field: &'a ActionField) -> Self {
        Self { field, recent: Default::default() }
    }

    pub fn value(&mut self, p: &Point) -> Result<f64> {
        self.field.chart.check(p)?;
        let near = self
            .recent
            .iter()
            .filter(|e| e.2 < Self::MAX_DEPTH)
            .map(|&(q, g, depth)| {
                let image = pt(p.x, q.y + wrap_half(p.y - q.y));
                ((image - q).norm(), q, image, g, depth)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0));
        let (v, depth) = match near {
            Some((d, _, _, g, depth)) if d == 0.0 => (g, depth),
            Some((d, q, image, g, depth)) if d < Self::REACH => {
                (g + self.field.integrate_phi(&CoverPath::line(q, image))?, depth + 1)
            }
            _ => (self.field.value(p)?, 0),
        };
        if self.recent.len() == Self::RECENT {
            self.recent.pop_front();
        }
        self.recent.push_back((*p, v, depth));
        Ok(v)
    }
}

/// Invariant probability measures whose mean action can be computed.
#[derive(Debug, Clone)]
pub enum Measure {
    /// Uniform measure on the points of a periodic orbit.
    Orbit(Vec<Point>),
    /// Normalized area.
    Lebesgue,
    /// Empirical measure of a trajectory.
    Birkhoff { start: Point, n: usize },
}

#[derive(Debug, Clone)]
pub struct FluxReport {
    pub flux: f64,
    pub path_used: CoverPath,
    /// `x₊θ₁ − x₋θ₀`.
    pub boundary_correction: f64,
    /// `∫_l (f̃*β₀ − β₀)` along the path.
    pub path_integral: f64,
}

/// Signed area between `f̃(l)` and `l` for a radial segment `l` from the
/// inner to the outer boundary, at angle `y`.
pub fn flux_along(map: &dyn AreaMap, y: f64, tol: f64) -> Result<FluxReport> {
    let chart = map.chart();
    let Chart::Annulus(a) = chart else {
        return Err(Error::InvalidInput("flux is defined for annulus maps".into()));
    };
    let b = detect_boundary_rotations(map)?;
    let path = CoverPath::line(pt(a.x_min, y), pt(a.x_max, y));
    flux_with_path(map, &b, path, tol)
}

/// Flux computed along an arbitrary path from the inner to the outer boundary.
pub fn flux_with_path(map: &dyn AreaMap, b: &BoundaryRotations, path: CoverPath, tol: f64) -> Result<FluxReport> {
    let chart = map.chart();
    let Chart::Annulus(a) = chart else {
        return Err(Error::InvalidInput("flux is defined for annulus maps".into()));
    };
    let form = PrimitiveForm::Beta0;
    let path_integral = integrate_one_form(&path, &chart, tol, |q| {
        let (fq, j) = map.lift_jac(q)?;
        Ok(form.pullback_difference(q, &fq, &j))
    })?;
    let boundary_correction = a.x_max * b.theta_upper - a.x_min * b.theta_lower;
    Ok(FluxReport { flux: boundary_correction - path_integral, path_used: path, boundary_correction, path_integral })
}

pub fn flux(map: &dyn AreaMap) -> Result<FluxReport> {
    flux_along(map, 0.0, DEFAULT_TOL)
}

/// `∫∫ (ỹ(f̃(p)) − y) dx dy`: the flux as an area integral of the
/// angular displacement.
pub fn displacement_integral(map: &dyn AreaMap, tol: f64) -> Result<f64> {
    let chart = map.chart();
    let (lo, hi) = chart.radial_range();
    integrate_2d(|x, y| Ok(map.lift(&pt(x, y))?.y - y), (lo, hi), (0.0, 1.0), tol)
}

/// Summary numbers for a map.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub theta0: f64,
    pub theta1: f64,
    pub flux: Option<f64>,
    pub calabi: f64,
    pub normalization: String,
    pub tol: f64,
    pub chart: String,
}

pub fn invariants(field: &ActionField, tol: f64) -> Result<InvariantReport> {
    let map = field.map().as_ref();
    let b = detect_boundary_rotations(map)?;
    let flux = match map.chart() {
        Chart::Annulus(_) => Some(flux_along(map, 0.0, tol)?.flux),
        Chart::Disk(_) => None,
    };
    Ok(InvariantReport {
        theta0: b.theta_lower,
        theta1: b.theta_upper,
        flux,
        calabi: field.calabi(tol)?,
        normalization: field.normalization().describe(),
        tol,
        chart: map.chart().describe(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapdef::{parse_map, MapDefinition};

    fn field(src: &str) -> ActionField {
        ActionField::standard(Arc::new(parse_map(src).unwrap())).unwrap()
    }

    #[test]
    fn twist_action_closed_form() {
        let g = field("twist(1, 0.25) on annulus[-1, 1]");
        assert!((g.value(&pt(0.0, 0.0)).unwrap() - 0.75).abs() < 1e-12);
        for &(x, y) in &[(0.5, 0.3), (-0.7, 0.9), (0.99, 0.5)] {
            let v = g.value(&pt(x, y)).unwrap();
            assert!((v - (x * x / 2.0 + 0.75)).abs() < 1e-12, "({x},{y})");
        }
    }

    #[test]
    fn rotation_action_is_constant() {
        let g = field("rotation(0.3) on annulus[0, 1]");
        for &(x, y) in &[(0.0, 0.0), (0.4, 0.6), (1.0, 0.1)] {
            assert!((g.value(&pt(x, y)).unwrap() - 0.3).abs() < 1e-15);
        }
        assert!((g.calabi(1e-10).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn identity_action_vanishes() {
        let g = ActionField::standard(Arc::new(MapDefinition::identity(Chart::annulus(0.0, 1.0).unwrap()))).unwrap();
        assert_eq!(g.value(&pt(0.3, 0.3)).unwrap(), 0.0);
        assert_eq!(g.calabi(1e-10).unwrap(), 0.0);
    }

    #[test]
    fn twist_calabi() {
        let g = field("twist(1, 0) on annulus[0, 1]");
        assert!((g.calabi(1e-10).unwrap() - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn twist_flux_values() {
        let m = parse_map("twist(1, 0) on annulus[0, 1]").unwrap();
        assert!((flux(&m).unwrap().flux - 0.5).abs() < 1e-12);
        let m = parse_map("twist(0.6, 0.15) on annulus[-1, 1]").unwrap();
        assert!((flux(&m).unwrap().flux - 0.3).abs() < 1e-12);
        let m = MapDefinition::identity(Chart::annulus(0.0, 1.0).unwrap());
        assert_eq!(flux(&m).unwrap().flux, 0.0);
    }

    #[test]
    fn orbit_measure_and_lebesgue() {
        let g = field("twist(1, 0) on annulus[0, 1]");
        let orbit = vec![pt(0.5, 0.1), pt(0.5, 0.6)];
        assert!((g.mean_action(&Measure::Orbit(orbit)).unwrap() - 0.625).abs() < 1e-12);
        assert!((g.mean_action(&Measure::Lebesgue).unwrap() - 2.0 / 3.0).abs() < 1e-9);
        let b = g.mean_action(&Measure::Birkhoff { start: pt(0.3, 0.7), n: 50 }).unwrap();
        assert!((b - 0.545).abs() < 1e-12);
    }

    #[test]
    fn disk_center_anchor() {
        let m = parse_map("disk_twist(1, 0.1) on disk").unwrap();
        let g = ActionField::new(
            Arc::new(m),
            PrimitiveForm::BetaD,
            Normalization { anchor: Anchor::Inner, value: NormValue::Theta },
            1e-10,
        )
        .unwrap();
        // f*β_D − β_D = a1 r² dr, so g(r) = θ_center + a1 r³ / 3.
        let v = g.value(&pt(0.6, 0.2)).unwrap();
        assert!((v - (0.1 + 0.6f64.powi(3) / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn chained_values_match_direct_evaluation() {
        for src in [
            "twist(1, 0.25) on annulus[-1, 1]",
            "compose(disk_rotation(0.25), bump_twist((0.55, 0), 0.3, 3.3 * bump(2*r - 1))) on disk",
        ] {
            let g = field(src);
            let mut chain = ActionChain::new(&g);
            let mut p = pt(0.53, 0.02);
            for _ in 0..300 {
                let a = chain.value(&p).unwrap();
                let b = g.value(&p).unwrap();
                assert!((a - b).abs() < 1e-8, "{src}: {a} vs {b}");
                p = g.map().lift(&p).unwrap();
            }
        }
    }
}