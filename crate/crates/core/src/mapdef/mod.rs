//! Area-preserving maps: the composition language, evaluation with
//! Jacobians, and boundary rotation detection.

mod boundary;
mod flow;
mod leaf;
mod parse;
mod spec;

pub use boundary::{detect_boundary_rotations, BoundaryRotations};
pub use flow::HamiltonianFlow;
pub use leaf::{BumpTwist, Leaf};
pub use parse::parse_map;
pub use spec::{Anchor, MapSpec, Normalization, NormValue, TaskConfig};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::surface::{pt, wrap01, Chart, Mat2, Point};

/// Anything that can be iterated on a chart: a lift to the universal cover
/// together with its derivative.
pub trait AreaMap: Send + Sync {
    fn chart(&self) -> Chart;

    /// `f̃(p)` and `Df(p)` at a cover point.
    fn lift_jac(&self, p: &Point) -> Result<(Point, Mat2)>;

    fn lift(&self, p: &Point) -> Result<Point> {
        Ok(self.lift_jac(p)?.0)
    }

    /// `f(p)` with the angular coordinate reduced to `[0, 1)`.
    fn evaluate(&self, p: &Point) -> Result<Point> {
        let q = self.lift(p)?;
        Ok(pt(q.x, wrap01(q.y)))
    }

    fn jacobian(&self, p: &Point) -> Result<Mat2> {
        Ok(self.lift_jac(p)?.1)
    }
}

/// Composition tree; `Compose([f1, f2, f3])` is `f1 ∘ f2 ∘ f3`.
#[derive(Debug, Clone, PartialEq)]
pub enum MapExpr {
    Leaf(Leaf),
    Compose(Vec<MapExpr>),
}

impl MapExpr {
    pub fn lift_jac(&self, p: &Point) -> Result<(Point, Mat2)> {
        match self {
            MapExpr::Leaf(l) => l.lift_jac(p),
            MapExpr::Compose(parts) => {
                let mut q = *p;
                let mut j = Mat2::identity();
                for part in parts.iter().rev() {
                    let (q2, j2) = part.lift_jac(&q)?;
                    q = q2;
                    j = j2 * j;
                }
                Ok((q, j))
            }
        }
    }

    pub fn lift(&self, p: &Point) -> Result<Point> {
        match self {
            MapExpr::Leaf(l) => l.lift(p),
            MapExpr::Compose(parts) => parts.iter().rev().try_fold(*p, |q, part| part.lift(&q)),
        }
    }

    pub fn leaves(&self) -> Vec<&Leaf> {
        match self {
            MapExpr::Leaf(l) => vec![l],
            MapExpr::Compose(parts) => parts.iter().flat_map(|p| p.leaves()).collect(),
        }
    }

    /// Source text in the map language; parses back to the same tree.
    pub fn to_source(&self) -> String {
        match self {
            MapExpr::Compose(parts) => {
                let inner: Vec<String> = parts.iter().map(|p| p.to_source()).collect();
                format!("compose({})", inner.join(", "))
            }
            MapExpr::Leaf(l) => match l {
                Leaf::Identity => "identity()".into(),
                Leaf::Rotation(c) => format!("rotation({c})"),
                Leaf::Twist { a1, a0 } => format!("twist({a1}, {a0})"),
                Leaf::HamiltonianFlow(f) => {
                    format!("hamiltonian_flow({}, {}, {})", f.hamiltonian, f.time, f.step)
                }
                Leaf::DiskRotation(c) => format!("disk_rotation({c})"),
                Leaf::DiskTwist { a1, a0 } => format!("disk_twist({a1}, {a0})"),
                Leaf::BumpTwist(b) => format!(
                    "bump_twist(({}, {}), {}, {})",
                    b.center.x, b.center.y, b.radius, b.profile
                ),
            },
        }
    }
}

/// A validated map on a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct MapDefinition {
    pub chart: Chart,
    pub expr: MapExpr,
}

impl MapDefinition {
    /// Wraps an expression tree, checking every leaf against the chart and
    /// for area preservation.
    pub fn new(chart: Chart, expr: MapExpr) -> Result<Self> {
        let def = Self { chart, expr };
        def.check_area()?;
        Ok(def)
    }

    pub fn identity(chart: Chart) -> Self {
        Self { chart, expr: MapExpr::Leaf(Leaf::Identity) }
    }

    pub fn leaf(chart: Chart, leaf: Leaf) -> Result<Self> {
        Self::new(chart, MapExpr::Leaf(leaf))
    }

    pub fn rotation(c: f64) -> Self {
        Self { chart: Chart::annulus(0.0, 1.0).unwrap(), expr: MapExpr::Leaf(Leaf::Rotation(c)) }
    }

    pub fn twist(chart: Chart, a1: f64, a0: f64) -> Self {
        Self { chart, expr: MapExpr::Leaf(Leaf::Twist { a1, a0 }) }
    }

    /// `self ∘ inner` (inner acts first).
    pub fn compose(&self, inner: &MapDefinition) -> Result<Self> {
        if self.chart != inner.chart {
            return Err(Error::InvalidInput("composed maps live on different charts".into()));
        }
        let mut parts = Vec::new();
        for e in [&self.expr, &inner.expr] {
            match e {
                MapExpr::Compose(ps) => parts.extend(ps.iter().cloned()),
                leaf => parts.push(leaf.clone()),
            }
        }
        Ok(Self { chart: self.chart, expr: MapExpr::Compose(parts) })
    }

    pub fn to_source(&self) -> String {
        format!("{} on {}", self.expr.to_source(), chart_source(&self.chart))
    }

    pub fn has_flow(&self) -> bool {
        self.expr.leaves().iter().any(|l| !l.is_closed_form())
    }

    /// Samples `det Df` at deterministic points of every leaf.
    fn check_area(&self) -> Result<()> {
        let (lo, hi) = self.chart.radial_range();
        for leaf in self.expr.leaves() {
            let tol = if leaf.is_closed_form() { 1e-9 } else { 1e-5 };
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            let n = if leaf.is_closed_form() { 64 } else { 24 };
            let mut samples: Vec<Point> = (0..n).map(|_| pt(rng.gen_range(lo..=hi), rng.gen_range(0.0..1.0))).collect();
            if let Leaf::BumpTwist(b) = leaf {
                // Concentrate on the support where the map actually moves points.
                let c = b.center;
                for k in 0..16 {
                    let t = k as f64 / 16.0;
                    let off = pt(b.radius * 0.9 * t * (7.0 * t).cos(), b.radius * 0.9 * t * (7.0 * t).sin());
                    let q = if b.on_disk { xy_to_polar(&(leaf::polar_to_xy(&c) + off)) } else { c + off };
                    samples.push(q);
                }
            }
            for p in samples {
                if self.chart.is_disk() && p.x < 1e-3 {
                    continue;
                }
                let (q, j) = leaf.lift_jac(&p)?;
                let ratio = self.chart.density(q.x) / self.chart.density(p.x);
                let defect = (ratio * j.determinant() - 1.0).abs();
                if !(defect <= tol) {
                    return Err(Error::AreaPreservation { leaf: leaf.name().into(), defect, x: p.x, y: p.y });
                }
            }
        }
        Ok(())
    }
}

fn xy_to_polar(q: &Point) -> Point {
    pt(q.norm(), wrap01(q.y.atan2(q.x) / std::f64::consts::TAU))
}

pub(crate) fn chart_source(chart: &Chart) -> String {
    match chart {
        Chart::Annulus(a) => format!("annulus[{}, {}]", a.x_min, a.x_max),
        Chart::Disk(_) => "disk".into(),
    }
}

impl AreaMap for MapDefinition {
    fn chart(&self) -> Chart {
        self.chart
    }

    fn lift_jac(&self, p: &Point) -> Result<(Point, Mat2)> {
        self.expr.lift_jac(p)
    }

    fn lift(&self, p: &Point) -> Result<Point> {
        self.expr.lift(p)
    }
}
