//! The annulus-to-disk embeddings `i_a(x, y) = (sqrt((x + a)/(a + 1)), y)`
//! and the extended disk maps `f_a = i_a ∘ f ∘ i_a⁻¹`, rigid on the hole.

use std::sync::Arc;

use serde::Serialize;

use crate::action::{flux_along, ActionField};
use crate::error::{Error, Result};
use crate::mapdef::{detect_boundary_rotations, AreaMap, BoundaryRotations, Normalization};
use crate::orbits::PeriodicOrbit;
use crate::surface::{pt, Chart, CoverPath, Mat2, Point, PrimitiveForm};

/// Stand-in for `a = ∞` when the finite-`a` expressions are evaluated.
pub const LARGE_A: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddingParams {
    pub a: f64,
    pub inner_radius: f64,
}

impl EmbeddingParams {
    pub fn new(a: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::InvalidInput(format!("embedding parameter must be finite and >= 0, got {a}")));
        }
        Ok(Self { a, inner_radius: (a / (a + 1.0)).sqrt() })
    }

    /// `i_a` on a point of the unit annulus.
    pub fn embed(&self, p: &Point) -> Point {
        pt(((p.x + self.a) / (self.a + 1.0)).max(0.0).sqrt(), p.y)
    }

    /// `i_a⁻¹` on a point of the band `r ≥ inner_radius`.
    pub fn unembed(&self, p: &Point) -> Point {
        pt((self.a + 1.0) * p.x * p.x - self.a, p.y)
    }

    pub fn band_area(&self) -> f64 {
        1.0 / (self.a + 1.0)
    }

    pub fn hole_area(&self) -> f64 {
        self.a / (self.a + 1.0)
    }
}

/// An annulus map moved to `[0, 1]` by `u = (x − x_min) / width`.
pub struct Renormalized {
    base: Arc<dyn AreaMap>,
    pub x_min: f64,
    pub width: f64,
}

impl Renormalized {
    pub fn to_unit(&self, p: &Point) -> Point {
        pt((p.x - self.x_min) / self.width, p.y)
    }
}

impl AreaMap for Renormalized {
    fn chart(&self) -> Chart {
        Chart::annulus(0.0, 1.0).unwrap()
    }

    fn lift_jac(&self, p: &Point) -> Result<(Point, Mat2)> {
        let x = pt(self.x_min + self.width * p.x, p.y);
        let (q, j) = self.base.lift_jac(&x)?;
        let s = Mat2::new(1.0 / self.width, 0.0, 0.0, 1.0);
        let s_inv = Mat2::new(self.width, 0.0, 0.0, 1.0);
        Ok((self.to_unit(&q), s * j * s_inv))
    }

    fn lift(&self, p: &Point) -> Result<Point> {
        let q = self.base.lift(&pt(self.x_min + self.width * p.x, p.y))?;
        Ok(self.to_unit(&q))
    }
}

/// `f_a` on the unit disk.
#[derive(Clone)]
pub struct DiskMap {
    /// The annulus map on `[0, 1]`.
    pub base: Arc<dyn AreaMap>,
    pub params: EmbeddingParams,
    pub boundary: BoundaryRotations,
    /// `(x_min, width)` when the original chart was not `[0, 1]`.
    pub renormalization: Option<(f64, f64)>,
}

impl std::fmt::Debug for DiskMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiskMap")
            .field("params", &self.params)
            .field("boundary", &self.boundary)
            .field("renormalization", &self.renormalization)
            .finish()
    }
}

/// Builds `f_a` from an annulus map; non-unit charts are renormalized.
pub fn embed(map: Arc<dyn AreaMap>, a: f64) -> Result<DiskMap> {
    let params = EmbeddingParams::new(a)?;
    let Chart::Annulus(chart) = map.chart() else {
        return Err(Error::InvalidInput("only annulus maps can be embedded".into()));
    };
    let (base, renormalization): (Arc<dyn AreaMap>, _) = if chart.x_min == 0.0 && chart.x_max == 1.0 {
        (map, None)
    } else {
        let r = Renormalized { base: map, x_min: chart.x_min, width: chart.width() };
        (Arc::new(r), Some((chart.x_min, chart.width())))
    };
    let boundary = detect_boundary_rotations(base.as_ref())?;
    Ok(DiskMap { base, params, boundary, renormalization })
}

impl DiskMap {
    pub fn hole_rotation(&self) -> f64 {
        self.boundary.theta_lower
    }

    /// Converts a point of the original annulus chart to the unit annulus.
    pub fn to_unit(&self, p: &Point) -> Point {
        match self.renormalization {
            Some((x0, w)) => pt((p.x - x0) / w, p.y),
            None => *p,
        }
    }

    /// Action field of the annulus map on `[0, 1]` with `β₀`.
    pub fn annulus_field(&self, tol: f64) -> Result<ActionField> {
        ActionField::new(self.base.clone(), PrimitiveForm::Beta0, Normalization::default(), tol)
    }

    /// Action field of `f_a` with `β_D`, pinned to `θ₁` on the unit circle.
    pub fn disk_field(&self, tol: f64) -> Result<ActionField> {
        ActionField::new(Arc::new(self.clone()), PrimitiveForm::BetaD, Normalization::default(), tol)
    }
}

impl AreaMap for DiskMap {
    fn chart(&self) -> Chart {
        Chart::disk()
    }

    fn lift_jac(&self, p: &Point) -> Result<(Point, Mat2)> {
        let r_in = self.params.inner_radius;
        if p.x < r_in || p.x <= 0.0 {
            return Ok((pt(p.x, p.y + self.hole_rotation()), Mat2::identity()));
        }
        let x = self.params.unembed(p);
        let (q, j) = self.base.lift_jac(&pt(x.x.max(0.0), x.y))?;
        let out = self.params.embed(&q);
        let k = 2.0 * (self.params.a + 1.0);
        let inner = Mat2::new(k * p.x, 0.0, 0.0, 1.0);
        let outer = Mat2::new(1.0 / (k * out.x), 0.0, 0.0, 1.0);
        Ok((out, outer * j * inner))
    }

    fn lift(&self, p: &Point) -> Result<Point> {
        if p.x < self.params.inner_radius || p.x <= 0.0 {
            return Ok(pt(p.x, p.y + self.hole_rotation()));
        }
        let x = self.params.unembed(p);
        Ok(self.params.embed(&self.base.lift(&pt(x.x.max(0.0), x.y))?))
    }
}

/// Computed value next to the closed-form prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pair {
    pub direct: f64,
    pub formula: f64,
}

impl Pair {
    pub fn gap(&self) -> f64 {
        (self.direct - self.formula).abs()
    }
}

/// Annulus-side invariants in unit coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusInvariants {
    pub theta0: f64,
    pub theta1: f64,
    pub flux: f64,
    pub calabi: f64,
}

pub fn annulus_invariants(dm: &DiskMap, tol: f64) -> Result<AnnulusInvariants> {
    let field = dm.annulus_field(tol)?;
    Ok(AnnulusInvariants {
        theta0: dm.boundary.theta_lower,
        theta1: dm.boundary.theta_upper,
        flux: flux_along(dm.base.as_ref(), 0.0, tol)?.flux,
        calabi: field.calabi(tol)?,
    })
}

/// `g_a` at the center by integrating `f_a*β_D − β_D` inward from the unit
/// circle (split at the hole radius), against `F/(1+a) + aθ₀/(1+a)`.
pub fn center_action(dm: &DiskMap, tol: f64) -> Result<Pair> {
    let inv = annulus_invariants(dm, tol)?;
    center_action_with(dm, &inv, tol)
}

/// `g_a` at the center by direct integration only.
pub fn center_action_direct(dm: &DiskMap, tol: f64) -> Result<f64> {
    center_value(dm, &dm.disk_field(tol)?)
}

fn center_value(dm: &DiskMap, field: &ActionField) -> Result<f64> {
    let r_in = dm.params.inner_radius;
    let path = CoverPath::polyline(&[pt(1.0, 0.0), pt(r_in, 0.0), pt(0.0, 0.0)]);
    Ok(field.anchor().1 + field.integrate_phi(&path)?)
}

fn center_action_with(dm: &DiskMap, inv: &AnnulusInvariants, tol: f64) -> Result<Pair> {
    let a = dm.params.a;
    let direct = center_value(dm, &dm.disk_field(tol)?)?;
    Ok(Pair { direct, formula: inv.flux / (1.0 + a) + a * inv.theta0 / (1.0 + a) })
}

/// `Cal(f_a)` from disk-side quadrature (the band, plus the constant value
/// on the hole) against `(Cal + 2aF + a²θ₀)/(1+a)²`.
pub fn calabi_of_fa(dm: &DiskMap, tol: f64) -> Result<Pair> {
    let inv = annulus_invariants(dm, tol)?;
    calabi_of_fa_with(dm, &inv, tol)
}

fn calabi_of_fa_with(dm: &DiskMap, inv: &AnnulusInvariants, tol: f64) -> Result<Pair> {
    let a = dm.params.a;
    let field = dm.disk_field(tol)?;
    let r_in = dm.params.inner_radius;
    let band = field.area_integral(r_in, 1.0, tol)?;
    let hole = center_value(dm, &field)? * dm.params.hole_area();
    Ok(Pair { direct: band + hole, formula: calabi_of_fa_formula(a, inv) })
}

/// `(Cal + 2aF + a²θ₀)/(1+a)²`.
pub fn calabi_of_fa_formula(a: f64, inv: &AnnulusInvariants) -> f64 {
    (inv.calabi + 2.0 * a * inv.flux + a * a * inv.theta0) / ((1.0 + a) * (1.0 + a))
}

/// Mean action of the image orbit on the disk against `𝒜/(1+a) + aρ/(1+a)`.
pub fn orbit_action_transform(dm: &DiskMap, orbit: &PeriodicOrbit, tol: f64) -> Result<Pair> {
    let a = dm.params.a;
    let annulus = dm.annulus_field(tol)?;
    let disk = dm.disk_field(tol)?;
    let unit: Vec<Point> = orbit.points.iter().map(|p| dm.to_unit(p)).collect();
    let image: Vec<Point> = unit.iter().map(|p| dm.params.embed(p)).collect();
    let direct = disk.mean_over(&image)?;
    let formula = annulus.mean_over(&unit)? / (1.0 + a) + a * orbit.rho_f64() / (1.0 + a);
    Ok(Pair { direct, formula })
}

/// Limits of the three transformation formulas as `a → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfiniteLimit {
    pub center_action: f64,
    pub calabi: f64,
}

pub fn infinite_limit(inv: &AnnulusInvariants) -> InfiniteLimit {
    InfiniteLimit { center_action: inv.theta0, calabi: inv.theta0 }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitRow {
    pub k: u32,
    pub m: i64,
    pub rho: f64,
    pub annulus_action: f64,
    pub transform: Pair,
}

/// Everything the embedding report prints.
#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingReport {
    pub a: f64,
    pub inner_radius: f64,
    pub renormalization: Option<(f64, f64)>,
    pub band_lower: f64,
    pub annulus: AnnulusInvariants,
    pub center_action: Pair,
    pub calabi: Pair,
    pub orbits: Vec<OrbitRow>,
    pub large_a: f64,
    pub large_a_center_action: Pair,
    pub large_a_calabi: Pair,
    pub infinite_limit: InfiniteLimit,
}

pub fn embedding_report(map: Arc<dyn AreaMap>, a: f64, orbits: &[PeriodicOrbit], tol: f64) -> Result<EmbeddingReport> {
    let inv = annulus_invariants(&embed(map.clone(), a)?, tol)?;
    embedding_report_with(map, a, orbits, &inv, tol)
}

/// As [`embedding_report`], reusing invariants of the unit-chart map.
pub fn embedding_report_with(
    map: Arc<dyn AreaMap>,
    a: f64,
    orbits: &[PeriodicOrbit],
    inv: &AnnulusInvariants,
    tol: f64,
) -> Result<EmbeddingReport> {
    let dm = embed(map.clone(), a)?;
    let inv = *inv;
    let rows = orbits
        .iter()
        .map(|o| {
            Ok(OrbitRow {
                k: o.k,
                m: o.m,
                rho: o.rho_f64(),
                annulus_action: o.mean_action,
                transform: orbit_action_transform(&dm, o, tol)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let big = embed(map, LARGE_A)?;
    Ok(EmbeddingReport {
        a,
        inner_radius: dm.params.inner_radius,
        renormalization: dm.renormalization,
        band_lower: dm.boundary.band_lower,
        annulus: inv,
        center_action: center_action_with(&dm, &inv, tol)?,
        calabi: calabi_of_fa_with(&dm, &inv, tol)?,
        orbits: rows,
        large_a: LARGE_A,
        large_a_center_action: center_action_with(&big, &inv, tol)?,
        large_a_calabi: calabi_of_fa_with(&big, &inv, tol)?,
        infinite_limit: infinite_limit(&inv),
    })
}
