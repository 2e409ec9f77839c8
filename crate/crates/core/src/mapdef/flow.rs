//! Time-T flows of a Hamiltonian on the annulus, integrated with the
//! implicit midpoint rule.
//!
//! Sign convention: `ẋ = −∂H/∂y`, `ẏ = ∂H/∂x`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{Expr, Program};
use crate::surface::{pt, wrap01, Mat2, Point};

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX: usize = 50;

#[derive(Debug, Clone)]
pub struct HamiltonianFlow {
    pub hamiltonian: Expr,
    pub time: f64,
    pub step: f64,
    n_steps: usize,
    program: Arc<Program>,
}

impl PartialEq for HamiltonianFlow {
    fn eq(&self, other: &Self) -> bool {
        self.hamiltonian == other.hamiltonian && self.time == other.time && self.step == other.step
    }
}

impl HamiltonianFlow {
    pub fn new(hamiltonian: Expr, time: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidInput(format!("flow step must be positive, got {step}")));
        }
        if !time.is_finite() {
            return Err(Error::InvalidInput(format!("flow time must be finite, got {time}")));
        }
        let program = Arc::new(hamiltonian.compile());
        let n_steps = (time.abs() / step).ceil().max(if time == 0.0 { 0.0 } else { 1.0 }) as usize;
        Ok(Self { hamiltonian, time, step, n_steps, program })
    }

    /// Vector field and its Jacobian at a cover point.
    fn field(&self, p: &Point) -> (Point, Mat2) {
        let j = self.program.eval_jet2(p.x, wrap01(p.y));
        let [hx, hy] = j.g;
        let [hxx, hxy, hyy] = j.h;
        (pt(-hy, hx), Mat2::new(-hxy, -hyy, hxx, hxy))
    }

    fn vector(&self, p: &Point) -> Point {
        let [hx, hy] = self.program.eval_jet2(p.x, wrap01(p.y)).g;
        pt(-hy, hx)
    }

    /// Lift of the flow and its Jacobian.
    pub fn lift_jac(&self, p: &Point) -> Result<(Point, Mat2)> {
        if self.n_steps == 0 {
            return Ok((*p, Mat2::identity()));
        }
        let h = self.time / self.n_steps as f64;
        let (v0, j0) = self.field(p);
        if v0.x == 0.0 && v0.y == 0.0 {
            // A zero of the field is fixed by every midpoint step.
            if j0.iter().all(|&a| a == 0.0) {
                return Ok((*p, Mat2::identity()));
            }
            let s = cayley(&j0, h).ok_or(Error::IntegratorFailure { x: p.x, y: p.y })?;
            return Ok((*p, s.pow(self.n_steps as u32)));
        }
        let mut z = *p;
        let mut jac = Mat2::identity();
        for _ in 0..self.n_steps {
            let (next, jm) = self.midpoint_step(&z, h, true)?;
            let s = cayley(&jm, h).ok_or(Error::IntegratorFailure { x: z.x, y: z.y })?;
            jac = s * jac;
            z = next;
        }
        Ok((z, jac))
    }

    pub fn lift(&self, p: &Point) -> Result<Point> {
        if self.n_steps == 0 {
            return Ok(*p);
        }
        let h = self.time / self.n_steps as f64;
        let v0 = self.vector(p);
        if v0.x == 0.0 && v0.y == 0.0 {
            return Ok(*p);
        }
        let mut z = *p;
        for _ in 0..self.n_steps {
            z = self.midpoint_step(&z, h, false)?.0;
        }
        Ok(z)
    }

    /// Solves `z' = z + h X((z + z')/2)` by simplified Newton with the
    /// Jacobian frozen at the explicit predictor. Returns `z'` and, when
    /// asked for, the field Jacobian at the converged midpoint.
    fn midpoint_step(&self, z: &Point, h: f64, want_jac: bool) -> Result<(Point, Mat2)> {
        let mut next = z + self.vector(z) * h;
        let (_, j) = self.field(&((z + next) * 0.5));
        let inv = (Mat2::identity() - j * (0.5 * h)).try_inverse().ok_or(Error::IntegratorFailure { x: z.x, y: z.y })?;
        for _ in 0..NEWTON_MAX {
            let mid = (z + next) * 0.5;
            let resid = next - z - self.vector(&mid) * h;
            let delta = inv * resid;
            next -= delta;
            if delta.norm() < NEWTON_TOL {
                let jm = if want_jac { self.field(&((z + next) * 0.5)).1 } else { Mat2::zeros() };
                return Ok((next, jm));
            }
        }
        Err(Error::IntegratorFailure { x: z.x, y: z.y })
    }
}

/// Derivative of one midpoint step: `(I − hJ/2)⁻¹ (I + hJ/2)`.
fn cayley(j: &Mat2, h: f64) -> Option<Mat2> {
    let a = Mat2::identity() - j * (0.5 * h);
    let b = Mat2::identity() + j * (0.5 * h);
    a.try_inverse().map(|inv| inv * b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pendulum_like() -> HamiltonianFlow {
        // Circular flow around (0.5, 0.5) with angular speed depending on radius.
        let h = Expr::parse("0.5*((x-0.5)^2 + (y-0.5)^2)").unwrap();
        HamiltonianFlow::new(h, 1.0, 1e-3).unwrap()
    }

    #[test]
    fn quadratic_hamiltonian_rotates_rigidly() {
        // H = |z - c|²/2 generates rotation by angle T (radians), counter-clockwise.
        let f = pendulum_like();
        let (q, _) = f.lift_jac(&pt(0.7, 0.5)).unwrap();
        let exact = pt(0.5 + 0.2 * 1f64.cos(), 0.5 + 0.2 * 1f64.sin());
        assert!((q - exact).norm() < 1e-6, "{q:?} vs {exact:?}");
    }

    #[test]
    fn determinant_is_one() {
        let f = pendulum_like();
        for &(x, y) in &[(0.3, 0.4), (0.6, 0.2), (0.55, 0.51)] {
            let (_, j) = f.lift_jac(&pt(x, y)).unwrap();
            assert!((j.determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let h = Expr::parse("0.01*sin(2*pi*y)*x^2*(1-x)^2").unwrap();
        let f = HamiltonianFlow::new(h, 1.0, 1e-2).unwrap();
        let p = pt(0.4, 0.3);
        let (_, j) = f.lift_jac(&p).unwrap();
        let e = 1e-6;
        for col in 0..2 {
            let mut dp = Point::zeros();
            dp[col] = e;
            let fd = (f.lift(&(p + dp)).unwrap() - f.lift(&(p - dp)).unwrap()) / (2.0 * e);
            for row in 0..2 {
                assert!((fd[row] - j[(row, col)]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let f = HamiltonianFlow::new(Expr::parse("x*y").unwrap(), 0.0, 1e-3).unwrap();
        assert_eq!(f.lift(&pt(0.3, 0.2)).unwrap(), pt(0.3, 0.2));
    }
}
