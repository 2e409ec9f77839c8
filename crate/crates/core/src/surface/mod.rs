//! Charts, primitive 1-forms, cover paths and line integrals.
//!
//! The annulus is `[x_min, x_max] x R/Z` with area form `dx ∧ dy`. The disk
//! uses polar coordinates `(r, θ)` with θ measured in full turns, so its area
//! form is `2r dr ∧ dθ` and the total area is 1. Points on either chart are
//! stored as `(radial, angular)` pairs, and the angular coordinate is usually
//! a universal-cover value (not reduced mod 1).

mod form;
mod path;
pub mod quadrature;

pub use form::PrimitiveForm;
pub use path::{integrate_form_along, integrate_one_form, CoverPath, Segment};

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// How far a sample may sit outside the chart before it counts as a violation.
pub const CHART_SLACK: f64 = 1e-12;

pub fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

/// Reduces an angle to `[0, 1)`.
pub fn wrap01(y: f64) -> f64 {
    let w = y - y.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Signed circle difference in `[-1/2, 1/2)`.
pub fn wrap_half(d: f64) -> f64 {
    let w = d - (d + 0.5).floor();
    if w >= 0.5 {
        w - 1.0
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusChart {
    pub x_min: f64,
    pub x_max: f64,
}

impl AnnulusChart {
    pub fn new(x_min: f64, x_max: f64) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::InvalidInput(format!(
                "annulus needs x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        Ok(Self { x_min, x_max })
    }

    pub fn unit() -> Self {
        Self { x_min: 0.0, x_max: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DiskChart;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chart {
    Annulus(AnnulusChart),
    Disk(DiskChart),
}

impl Chart {
    pub fn annulus(x_min: f64, x_max: f64) -> Result<Chart> {
        AnnulusChart::new(x_min, x_max).map(Chart::Annulus)
    }

    pub fn disk() -> Chart {
        Chart::Disk(DiskChart)
    }

    pub fn is_disk(&self) -> bool {
        matches!(self, Chart::Disk(_))
    }

    /// Range of the radial coordinate (`x` or `r`).
    pub fn radial_range(&self) -> (f64, f64) {
        match self {
            Chart::Annulus(a) => (a.x_min, a.x_max),
            Chart::Disk(_) => (0.0, 1.0),
        }
    }

    /// Area density with respect to `d(radial) d(angle)`.
    pub fn density(&self, s: f64) -> f64 {
        match self {
            Chart::Annulus(_) => 1.0,
            Chart::Disk(_) => 2.0 * s,
        }
    }

    /// Area of the sub-band between the lower radial bound and `s`.
    pub fn cumulative_area(&self, s: f64) -> f64 {
        match self {
            Chart::Annulus(a) => s - a.x_min,
            Chart::Disk(_) => s * s,
        }
    }

    pub fn total_area(&self) -> f64 {
        self.cumulative_area(self.radial_range().1)
    }

    pub fn contains(&self, p: &Point) -> bool {
        let (lo, hi) = self.radial_range();
        p.x.is_finite() && p.y.is_finite() && p.x >= lo - CHART_SLACK && p.x <= hi + CHART_SLACK
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::ChartViolation { x: p.x, y: p.y })
        }
    }

    /// Clamps a point that is inside up to [`CHART_SLACK`] back onto the chart.
    pub fn clamp(&self, p: Point) -> Point {
        let (lo, hi) = self.radial_range();
        pt(p.x.clamp(lo, hi), p.y)
    }

    /// The standard primitive of the area form on this chart.
    pub fn standard_form(&self) -> PrimitiveForm {
        match self {
            Chart::Annulus(_) => PrimitiveForm::Beta0,
            Chart::Disk(_) => PrimitiveForm::BetaD,
        }
    }

    /// Area integral `∫∫ h ω` over the chart, the angle running over one turn.
    pub fn integrate_area<F>(&self, mut h: F, tol: f64) -> Result<f64>
    where
        F: FnMut(Point) -> Result<f64>,
    {
        let (lo, hi) = self.radial_range();
        quadrature::integrate_2d(|s, t| Ok(self.density(s) * h(pt(s, t))?), (lo, hi), (0.0, 1.0), tol)
    }

    pub fn describe(&self) -> String {
        match self {
            Chart::Annulus(a) => format!("annulus[{}, {}]", a.x_min, a.x_max),
            Chart::Disk(_) => "disk".to_string(),
        }
    }
}

/// Lifts a sequence of circle-valued points to the universal cover with a
/// continuous angular coordinate. The first point lands in `[0, 1)`.
pub fn lift_unwrap(points: &[Point]) -> Result<Vec<Point>> {
    let mut out = Vec::with_capacity(points.len());
    let Some(first) = points.first() else {
        return Ok(out);
    };
    out.push(pt(first.x, wrap01(first.y)));
    for (i, w) in points.windows(2).enumerate() {
        let d = wrap_half(w[1].y - w[0].y);
        if d.abs() >= 0.5 {
            return Err(Error::AmbiguousLift { index: i, distance: d.abs() });
        }
        let prev = out[i].y;
        out.push(pt(w[1].x, prev + d));
    }
    Ok(out)
}
