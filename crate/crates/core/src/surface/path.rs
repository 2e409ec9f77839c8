use std::fmt;
use std::sync::Arc;

use super::quadrature::integrate;
use super::{Chart, Point, PrimitiveForm};
use crate::error::{Error, Result};

/// Position and velocity at parameter `t ∈ [0, 1]`.
pub type Sampler = Arc<dyn Fn(f64) -> (Point, Point) + Send + Sync>;

#[derive(Clone)]
pub enum Segment {
    Line { start: Point, end: Point },
    Curve { start: Point, end: Point, sampler: Sampler },
}

impl Segment {
    pub fn start(&self) -> Point {
        match self {
            Segment::Line { start, .. } | Segment::Curve { start, .. } => *start,
        }
    }

    pub fn end(&self) -> Point {
        match self {
            Segment::Line { end, .. } | Segment::Curve { end, .. } => *end,
        }
    }

    pub fn sample(&self, t: f64) -> (Point, Point) {
        match self {
            Segment::Line { start, end } => (start + (end - start) * t, end - start),
            Segment::Curve { sampler, .. } => sampler(t),
        }
    }
}

impl fmt::Debug for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Segment::Line { start, end } => write!(f, "Line({start:?} -> {end:?})"),
            Segment::Curve { start, end, .. } => write!(f, "Curve({start:?} -> {end:?})"),
        }
    }
}

/// A piecewise curve in the universal cover `[x_min, x_max] x R`.
#[derive(Debug, Clone, Default)]
pub struct CoverPath {
    segments: Vec<Segment>,
}

impl CoverPath {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn line(a: Point, b: Point) -> Self {
        Self { segments: vec![Segment::Line { start: a, end: b }] }
    }

    /// Straight segments through the given vertices.
    pub fn polyline(points: &[Point]) -> Self {
        let segments = points.windows(2).map(|w| Segment::Line { start: w[0], end: w[1] }).collect();
        Self { segments }
    }

    /// Appends a segment; it must start where the path currently ends.
    pub fn push(&mut self, seg: Segment) -> Result<()> {
        if let Some(last) = self.segments.last() {
            let gap = (last.end() - seg.start()).norm();
            if gap > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "segment starts {gap:.3e} away from the end of the path"
                )));
            }
        }
        self.segments.push(seg);
        Ok(())
    }

    pub fn line_to(mut self, b: Point) -> Self {
        let a = self.end().expect("line_to on an empty path");
        self.segments.push(Segment::Line { start: a, end: b });
        self
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn start(&self) -> Option<Point> {
        self.segments.first().map(Segment::start)
    }

    pub fn end(&self) -> Option<Point> {
        self.segments.last().map(Segment::end)
    }
}

/// Integrates a primitive form along a cover path.
pub fn integrate_form_along(path: &CoverPath, form: &PrimitiveForm, chart: &Chart, tol: f64) -> Result<f64> {
    integrate_one_form(path, chart, tol, |p| Ok(form.coefficients(p)))
}

/// Integrates the 1-form with coefficients `(P, Q)` along a cover path.
/// The tolerance is split evenly between segments.
pub fn integrate_one_form<F>(path: &CoverPath, chart: &Chart, tol: f64, coeffs: F) -> Result<f64>
where
    F: Fn(&Point) -> Result<(f64, f64)>,
{
    let n = path.segments.len().max(1) as f64;
    let mut total = 0.0;
    for seg in &path.segments {
        if (seg.end() - seg.start()).norm() == 0.0 && matches!(seg, Segment::Line { .. }) {
            continue;
        }
        total += integrate(
            |t| {
                let (p, v) = seg.sample(t);
                chart.check(&p)?;
                let (a, b) = coeffs(&p)?;
                Ok(a * v.x + b * v.y)
            },
            0.0,
            1.0,
            tol / n,
        )?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::super::pt;
    use super::*;

    #[test]
    fn horizontal_segment_has_no_beta0_integral() {
        let c = Chart::annulus(0.0, 1.0).unwrap();
        let v = integrate_form_along(&CoverPath::line(pt(0.0, 0.0), pt(1.0, 0.0)), &PrimitiveForm::Beta0, &c, 1e-9).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn vertical_segment_on_the_outer_boundary() {
        let c = Chart::annulus(0.0, 1.0).unwrap();
        let v = integrate_form_along(&CoverPath::line(pt(1.0, 0.0), pt(1.0, 0.7)), &PrimitiveForm::Beta0, &c, 1e-9).unwrap();
        assert!((v - 0.7).abs() < 1e-12);
    }

    #[test]
    fn quarter_turn_on_the_unit_circle() {
        let v = integrate_form_along(
            &CoverPath::line(pt(1.0, 0.0), pt(1.0, 0.25)),
            &PrimitiveForm::BetaD,
            &Chart::disk(),
            1e-9,
        )
        .unwrap();
        assert!((v - 0.25).abs() < 1e-12);
    }

    #[test]
    fn curved_segment_matches_closed_form() {
        // x = 0.5 + 0.25 sin(2πt), y = t: ∫ x dy = 0.5.
        let tau = std::f64::consts::TAU;
        let sampler: Sampler = Arc::new(move |t: f64| {
            (pt(0.5 + 0.25 * (tau * t).sin(), t), pt(0.25 * tau * (tau * t).cos(), 1.0))
        });
        let mut path = CoverPath::new();
        path.push(Segment::Curve { start: pt(0.5, 0.0), end: pt(0.5, 1.0), sampler }).unwrap();
        let c = Chart::annulus(0.0, 1.0).unwrap();
        let v = integrate_form_along(&path, &PrimitiveForm::Beta0, &c, 1e-11).unwrap();
        assert!((v - 0.5).abs() < 1e-11);
    }

    #[test]
    fn leaving_the_chart_is_reported() {
        let c = Chart::annulus(0.0, 1.0).unwrap();
        let err = integrate_form_along(&CoverPath::line(pt(0.5, 0.0), pt(1.5, 0.0)), &PrimitiveForm::Beta0, &c, 1e-9)
            .unwrap_err();
        assert!(matches!(err, Error::ChartViolation { .. }));
    }

    #[test]
    fn disconnected_segments_are_rejected() {
        let mut p = CoverPath::line(pt(0.0, 0.0), pt(0.5, 0.0));
        assert!(p.push(Segment::Line { start: pt(0.6, 0.0), end: pt(0.7, 0.0) }).is_err());
    }
}
