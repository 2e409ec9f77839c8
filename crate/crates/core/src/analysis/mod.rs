//! Witness searches for the action–Calabi inequalities and the
//! action–rotation diagram.

mod hull;
mod verdict;

use serde::Serialize;

pub use hull::{convex_hull, cross, hull_contains};
pub use verdict::{tightest_witness, Bound, Conclusion, HypothesisValues, Status, Verdict, Witness};

use crate::action::{ActionField, InvariantReport};
use crate::embedding::{center_action_direct, DiskMap};
use crate::error::{Error, Result};
use crate::orbits::{BirkhoffSample, PeriodicOrbit};
use crate::surface::pt;
use num_rational::Ratio;

/// Default tolerance for every inequality check.
pub const CHECK_TOL: f64 = 1e-6;

/// The `a` values the general line is evaluated on unless told otherwise.
pub const DEFAULT_A_GRID: [f64; 6] = [0.0, 0.2, 0.5, 1.0, 2.0, 5.0];

impl HypothesisValues {
    /// Pulls `(θ₀, θ₁, F, Cal)` out of an annulus invariant report.
    pub fn from_report(r: &InvariantReport) -> Result<Self> {
        let flux = r.flux.ok_or_else(|| Error::InvalidInput("hypothesis values need an annulus map".into()))?;
        Ok(Self { theta0: r.theta0, theta1: r.theta1, flux, calabi: r.calabi })
    }
}

/// `inf 𝒜 ≤ Cal ≤ sup 𝒜` over the atlas.
pub fn check_sandwich(values: HypothesisValues, atlas: &[PeriodicOrbit], tol: f64) -> Verdict {
    let cal = values.calabi;
    Verdict::evaluate(
        "sandwich",
        "always",
        true,
        values,
        vec![Conclusion::at_most(cal, 0.0), Conclusion::at_least(cal, 0.0)],
        atlas,
        tol,
    )
}

/// Constant term of the line `𝒜 = Cal/(1+a) + a(2F−θ₀)/(1+a) + a(θ₀−ρ)`.
pub fn line_constant(v: &HypothesisValues, a: f64) -> f64 {
    v.calabi / (1.0 + a) + a * (2.0 * v.flux - v.theta0) / (1.0 + a) + a * v.theta0
}

/// Height of the `a`-line at `ρ = θ₀`.
pub fn line_height_at_theta0(v: &HypothesisValues, a: f64) -> f64 {
    if a.is_infinite() {
        2.0 * v.flux - v.theta0
    } else {
        (v.calabi + a * (2.0 * v.flux - v.theta0)) / (1.0 + a)
    }
}

/// The three bullets plus the general-`a` family in both directions.
pub fn check_main_theorem(values: HypothesisValues, atlas: &[PeriodicOrbit], a_grid: &[f64], tol: f64) -> Vec<Verdict> {
    let HypothesisValues { theta0, flux, calabi, .. } = values;
    let mut out = Vec::new();

    out.push(Verdict::evaluate(
        "main theorem bullet 1",
        "F < Cal",
        flux < calabi - tol,
        values,
        vec![Conclusion::at_least(calabi, 0.0)],
        atlas,
        tol,
    ));

    out.push(
        Verdict::evaluate(
            "main theorem bullet 2",
            "theta0 < Cal",
            theta0 < calabi - tol,
            values,
            vec![Conclusion::at_least((calabi + flux + theta0) / 2.0, -1.0)],
            atlas,
            tol,
        )
        .with_note(
            "the bound names one witness but uses the rotation number of another; both are read as the same orbit. \
             The a = 1 line reads (Cal + 2F)/2 + theta0/2 - rho instead",
        ),
    );

    out.push(Verdict::evaluate(
        "main theorem bullet 3",
        "theta0 <= F < Cal",
        theta0 <= flux + tol && flux < calabi - tol,
        values,
        vec![Conclusion::RhoAtLeast { theta0, action_if_equal: 2.0 * flux - theta0 }],
        atlas,
        tol,
    ));

    for &a in a_grid {
        let lhs = (1.0 - a) * flux + a * theta0;
        let c = line_constant(&values, a);
        out.push(Verdict::evaluate(
            format!("general line a = {a}"),
            format!("(1-a)F + a*theta0 < Cal with a = {a}"),
            lhs < calabi - tol,
            values,
            vec![Conclusion::at_least(c, -a)],
            atlas,
            tol,
        ));
        out.push(Verdict::evaluate(
            format!("general line a = {a} (mirrored)"),
            format!("(1-a)F + a*theta0 > Cal with a = {a}"),
            lhs > calabi + tol,
            values,
            vec![Conclusion::at_most(c, -a)],
            atlas,
            tol,
        ));
    }
    out
}

/// `Cal < max{g(A₁), g(A₋₁)} ⇒ inf 𝒜 ≤ Cal`, under both readings of the
/// lower boundary value: the rotation number `θ₀` and the computed
/// `g` on the inner boundary.
pub fn check_conjecture(values: HypothesisValues, g_inner: f64, atlas: &[PeriodicOrbit], tol: f64) -> Vec<Verdict> {
    let readings = [("lower value = theta0", values.theta0), ("lower value = g on the inner boundary", g_inner)];
    readings
        .iter()
        .map(|&(label, lower)| {
            let top = values.theta1.max(lower);
            Verdict::evaluate(
                format!("conjecture (unproved), {label}"),
                format!("Cal < max(theta1, {lower})"),
                values.calabi < top - tol,
                values,
                vec![Conclusion::at_most(values.calabi, 0.0)],
                atlas,
                tol,
            )
            .with_note("conjecture (unproved); a missing witness at finite depth is informational only")
        })
        .collect()
}

/// Disk-side atlas of `f_a`: embedded orbits with their disk actions plus
/// the fixed center.
pub fn disk_atlas(dm: &DiskMap, atlas: &[PeriodicOrbit], tol: f64) -> Result<Vec<PeriodicOrbit>> {
    let mut out = Vec::with_capacity(atlas.len() + 1);
    let center = center_action_direct(dm, tol)?;
    out.push(PeriodicOrbit {
        points: vec![pt(0.0, 0.0)],
        k: 1,
        m: 0,
        rho: Ratio::from_integer(0),
        mean_action: center,
        residual: 0.0,
        continuum: false,
    });
    let disk = dm.disk_field(tol)?;
    for o in atlas {
        let points: Vec<_> = o.points.iter().map(|p| dm.params.embed(&dm.to_unit(p))).collect();
        out.push(PeriodicOrbit { mean_action: disk.mean_over(&points)?, points, ..o.clone() });
    }
    Ok(out)
}

/// Boundary-rotation comparison on the disk: `inf 𝒜 ≤ Cal(f_a)` when
/// `Cal(f_a)` is below the boundary rotation, `sup 𝒜 ≥ Cal(f_a)` when above.
pub fn check_hutchings_disk(disk_calabi: f64, boundary_rotation: f64, disk_atlas: &[PeriodicOrbit], tol: f64) -> Verdict {
    let values = HypothesisValues { theta0: boundary_rotation, theta1: boundary_rotation, flux: f64::NAN, calabi: disk_calabi };
    if disk_calabi < boundary_rotation - tol {
        Verdict::evaluate(
            "disk theorem (inf side)",
            "Cal(f_a) < boundary rotation",
            true,
            values,
            vec![Conclusion::at_most(disk_calabi, 0.0)],
            disk_atlas,
            tol,
        )
    } else if disk_calabi > boundary_rotation + tol {
        Verdict::evaluate(
            "disk theorem (sup side)",
            "Cal(f_a) > boundary rotation",
            true,
            values,
            vec![Conclusion::at_least(disk_calabi, 0.0)],
            disk_atlas,
            tol,
        )
        .with_note("reversed orientation: the upper bound of the sandwich is checked")
    } else {
        Verdict::evaluate("disk theorem", "Cal(f_a) != boundary rotation", false, values, vec![], disk_atlas, tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointKind {
    Orbit { k: u32, m: i64, continuum: bool },
    Lebesgue,
    Birkhoff { start: (f64, f64), n: usize },
}

impl PointKind {
    pub fn label(&self) -> &'static str {
        match self {
            PointKind::Orbit { .. } => "orbit",
            PointKind::Lebesgue => "lebesgue",
            PointKind::Birkhoff { .. } => "birkhoff",
        }
    }
}

/// One invariant measure as a point `(ρ, 𝒜)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurePoint {
    pub rho: f64,
    pub action: f64,
    pub kind: PointKind,
    pub weight: Option<f64>,
}

/// The line of slope `−a` through `(θ₀, line_height_at_theta0)`;
/// `a = None` is the vertical limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenLine {
    pub a: Option<f64>,
    pub slope: Option<f64>,
    pub through: (f64, f64),
}

impl GreenLine {
    pub fn new(v: &HypothesisValues, a: f64) -> Self {
        let h = line_height_at_theta0(v, a);
        if a.is_infinite() {
            GreenLine { a: None, slope: None, through: (v.theta0, h) }
        } else {
            GreenLine { a: Some(a), slope: Some(-a), through: (v.theta0, h) }
        }
    }

    pub fn at(&self, rho: f64) -> Option<f64> {
        self.slope.map(|s| self.through.1 + s * (rho - self.through.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagram {
    pub points: Vec<MeasurePoint>,
    pub hull: Vec<(f64, f64)>,
    pub lebesgue: Option<(f64, f64)>,
    pub theta0: Option<f64>,
    pub green_lines: Vec<GreenLine>,
}

impl Diagram {
    pub fn rho_span(&self) -> (f64, f64) {
        span(self.points.iter().map(|p| p.rho))
    }

    pub fn action_span(&self) -> (f64, f64) {
        span(self.points.iter().map(|p| p.action))
    }
}

fn span(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// `a` values of the green-line family, `∞` last.
pub const GREEN_LINE_A: [f64; 7] = [0.0, 0.2, 0.5, 1.0, 2.0, 5.0, f64::INFINITY];

/// Collects orbit, Birkhoff and Lebesgue points with their hull; the
/// reference lines are drawn when `values` is given.
pub fn build_diagram(
    atlas: &[PeriodicOrbit],
    lebesgue: Option<(f64, f64)>,
    birkhoff: &[BirkhoffSample],
    values: Option<&HypothesisValues>,
) -> Result<Diagram> {
    let mut points: Vec<MeasurePoint> = atlas
        .iter()
        .map(|o| MeasurePoint {
            rho: o.rho_f64(),
            action: o.mean_action,
            kind: PointKind::Orbit { k: o.k, m: o.m, continuum: o.continuum },
            weight: None,
        })
        .collect();
    points.extend(birkhoff.iter().map(|b| MeasurePoint {
        rho: b.rho_estimate,
        action: b.action_average,
        kind: PointKind::Birkhoff { start: (b.start.x, b.start.y), n: b.n },
        weight: None,
    }));
    if let Some((rho, action)) = lebesgue {
        points.push(MeasurePoint { rho, action, kind: PointKind::Lebesgue, weight: None });
    }
    if points.is_empty() {
        return Err(Error::InvalidInput("a diagram needs at least one point".into()));
    }
    let coords: Vec<(f64, f64)> = points.iter().map(|p| (p.rho, p.action)).collect();
    let green_lines = values.map(|v| GREEN_LINE_A.iter().map(|&a| GreenLine::new(v, a)).collect()).unwrap_or_default();
    Ok(Diagram { hull: convex_hull(&coords), points, lebesgue, theta0: values.map(|v| v.theta0), green_lines })
}

/// `(ρ, 𝒜)` of the normalized area measure: mean angular displacement
/// and the Calabi invariant.
pub fn lebesgue_point(field: &ActionField, tol: f64) -> Result<(f64, f64)> {
    let map = field.map().as_ref();
    let chart = map.chart();
    let disp = chart.integrate_area(|p| Ok(map.lift(&p)?.y - p.y), tol)?;
    Ok((disp / chart.total_area(), field.calabi(tol)?))
}
