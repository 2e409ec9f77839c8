//! Numerical versions of the structural identities between action functions.

use std::sync::Arc;

use super::ActionField;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::mapdef::{AreaMap, MapDefinition, NormValue, Normalization};
use crate::surface::{Point, PrimitiveForm};

/// Mean angular displacement of the lift over a point set.
fn mean_displacement(map: &dyn AreaMap, points: &[Point]) -> Result<f64> {
    let mut s = 0.0;
    for p in points {
        s += map.lift(p)?.y - p.y;
    }
    Ok(s / points.len() as f64)
}

/// Compares the mean actions for `β` and `β + c dy`, both pinned to zero at
/// `x0`, against `c ρ(μ) − C`, where `C = c (ỹ(f̃(x0)) − y(x0))` is the
/// integral of `c dy` along the isotopy path of `x0`. Returns `(lhs, rhs)`
/// for every orbit measure.
pub fn action_difference_check(
    map: Arc<dyn AreaMap>,
    base: &PrimitiveForm,
    c: f64,
    x0: Point,
    orbits: &[Vec<Point>],
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    let norm = Normalization::at_point(x0, 0.0);
    let plain = ActionField::new(map.clone(), base.clone(), norm, tol)?;
    let shifted = ActionField::new(map.clone(), PrimitiveForm::shifted(base.clone(), c, None), norm, tol)?;
    let constant = c * (map.lift(&x0)?.y - x0.y);
    orbits
        .iter()
        .map(|orbit| {
            let lhs = shifted.mean_over(orbit)? - plain.mean_over(orbit)?;
            let rho = mean_displacement(map.as_ref(), orbit)?;
            Ok((lhs, c * rho - constant))
        })
        .collect()
}

/// Calabi invariant of `f2 ∘ f1` against `Cal(f1) + Cal(f2)`. The factors
/// use the standard normalization; the composite is pinned at `x0` to
/// `g1(x0) + g2(f1(x0))`.
pub fn composition_additivity_check(f1: &MapDefinition, f2: &MapDefinition, x0: Point, tol: f64) -> Result<(f64, f64)> {
    let composite = f2.compose(f1)?;
    let g1 = ActionField::standard(Arc::new(f1.clone()))?.with_tol(tol);
    let g2 = ActionField::standard(Arc::new(f2.clone()))?.with_tol(tol);
    let pinned = g1.value(&x0)? + g2.value(&f1.evaluate(&x0)?)?;
    let form = composite.chart.standard_form();
    let g12 = ActionField::new(Arc::new(composite), form, Normalization::at_point(x0, pinned), tol)?;
    Ok((g12.calabi(tol)?, g1.calabi(tol)? + g2.calabi(tol)?))
}

/// Adds `dS` to the form and reports how far the change in mean action
/// varies across orbit measures, relative to the first one. Zero means the
/// two forms give the same mean action up to one constant.
pub fn exact_shift_check(field: &ActionField, s: &Expr, orbits: &[Vec<Point>]) -> Result<f64> {
    let Some(first) = orbits.first() else {
        return Err(Error::InvalidInput("need at least one orbit measure".into()));
    };
    let norm = match field.normalization().value {
        NormValue::Theta => {
            let (p, v) = field.anchor();
            Normalization::at_point(p, v)
        }
        NormValue::Value(_) => field.normalization(),
    };
    let shifted = ActionField::new(
        field.map().clone(),
        PrimitiveForm::shifted(field.form().clone(), 0.0, Some(s.clone())),
        norm,
        field.tol(),
    )?;
    let diff = |o: &Vec<Point>| -> Result<f64> { Ok(shifted.mean_over(o)? - field.mean_over(o)?) };
    let reference = diff(first)?;
    let mut worst: f64 = 0.0;
    for o in &orbits[1..] {
        worst = worst.max((diff(o)? - reference).abs());
    }
    Ok(worst)
}
