use std::fmt;
use std::sync::Arc;

use super::{Chart, Mat2, Point};
use crate::error::{Error, Result};
use crate::expr::{Env, Expr, Program, Var};

/// A primitive of (a multiple of) the area form, stored as coefficients
/// `P d(radial) + Q d(angle)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PrimitiveForm {
    /// `x dy` on the annulus.
    Beta0,
    /// `r² dθ` on the disk.
    BetaD,
    /// `(x + a) dy / (a + 1)` on the annulus; its differential is `ω / (a + 1)`.
    BetaA(f64),
    /// `base + c dy + dS`, with `S` an optional scalar function.
    Shifted {
        base: Box<PrimitiveForm>,
        c: f64,
        exact: Option<ExactPart>,
    },
}

/// The differential `dS` of a scalar expression.
#[derive(Clone)]
pub struct ExactPart {
    pub source: Expr,
    d_radial: Arc<Program>,
    d_angle: Arc<Program>,
}

impl ExactPart {
    /// Builds `dS`. Either coordinate name of a chart may be used: `x`/`r`
    /// bind the radial coordinate and `y`/`theta` the angular one.
    pub fn new(source: Expr) -> Self {
        let dr = source.diff(Var::X);
        let dr = add_parts(dr, source.diff(Var::R));
        let dt = add_parts(source.diff(Var::Y), source.diff(Var::Theta));
        Self {
            d_radial: Arc::new(dr.compile()),
            d_angle: Arc::new(dt.compile()),
            source,
        }
    }

    fn coefficients(&self, p: &Point) -> (f64, f64) {
        let env = Env::chart(p.x, p.y);
        (self.d_radial.eval(&env), self.d_angle.eval(&env))
    }
}

fn add_parts(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (_, Expr::Const(v)) if *v == 0.0 => a,
        (Expr::Const(v), _) if *v == 0.0 => b,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

impl fmt::Debug for ExactPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactPart({})", self.source)
    }
}

impl PartialEq for ExactPart {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl PrimitiveForm {
    pub fn beta_a(a: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::InvalidInput(format!("beta_a needs a >= 0, got {a}")));
        }
        Ok(PrimitiveForm::BetaA(a))
    }

    pub fn shifted(base: PrimitiveForm, c: f64, exact: Option<Expr>) -> Self {
        PrimitiveForm::Shifted {
            base: Box::new(base),
            c,
            exact: exact.map(ExactPart::new),
        }
    }

    /// `(P, Q)` at `p`.
    pub fn coefficients(&self, p: &Point) -> (f64, f64) {
        match self {
            PrimitiveForm::Beta0 => (0.0, p.x),
            PrimitiveForm::BetaD => (0.0, p.x * p.x),
            PrimitiveForm::BetaA(a) => (0.0, (p.x + a) / (a + 1.0)),
            PrimitiveForm::Shifted { base, c, exact } => {
                let (bp, bq) = base.coefficients(p);
                let (ep, eq) = exact.as_ref().map_or((0.0, 0.0), |e| e.coefficients(p));
                (bp + ep, bq + c + eq)
            }
        }
    }

    /// Ratio between `d(form)` and the chart's area form.
    pub fn area_scale(&self) -> f64 {
        match self {
            PrimitiveForm::Beta0 | PrimitiveForm::BetaD => 1.0,
            PrimitiveForm::BetaA(a) => 1.0 / (a + 1.0),
            PrimitiveForm::Shifted { base, .. } => base.area_scale(),
        }
    }

    /// Whether the form lives on the given chart.
    pub fn fits(&self, chart: &Chart) -> bool {
        match self {
            PrimitiveForm::Beta0 | PrimitiveForm::BetaA(_) => !chart.is_disk(),
            PrimitiveForm::BetaD => chart.is_disk(),
            PrimitiveForm::Shifted { base, .. } => base.fits(chart),
        }
    }

    /// Coefficients of `f*β − β` at `p`, given `f̃(p)` and `Df(p)`.
    pub fn pullback_difference(&self, p: &Point, fp: &Point, df: &Mat2) -> (f64, f64) {
        let (p1, q1) = self.coefficients(fp);
        let (p0, q0) = self.coefficients(p);
        let pulled = df.transpose() * Point::new(p1, q1);
        (pulled.x - p0, pulled.y - q0)
    }

    pub fn name(&self) -> String {
        match self {
            PrimitiveForm::Beta0 => "beta0".into(),
            PrimitiveForm::BetaD => "betaD".into(),
            PrimitiveForm::BetaA(a) => format!("beta_a({a})"),
            PrimitiveForm::Shifted { base, c, exact } => match exact {
                Some(e) => format!("{} + {c} dy + d({})", base.name(), e.source),
                None => format!("{} + {c} dy", base.name()),
            },
        }
    }
}
