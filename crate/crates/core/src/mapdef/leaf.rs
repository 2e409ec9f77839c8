use std::f64::consts::TAU;
use std::sync::Arc;

use super::flow::HamiltonianFlow;
use crate::error::Result;
use crate::expr::{Env, Expr, Program, Var};
use crate::surface::{pt, wrap_half, Mat2, Point};

/// A closed-form or integrated building block of a map.
#[derive(Debug, Clone, PartialEq)]
pub enum Leaf {
    Identity,
    /// `(x, y) ↦ (x, y + c)` on the annulus.
    Rotation(f64),
    /// `(x, y) ↦ (x, y + a1 x + a0)`.
    Twist { a1: f64, a0: f64 },
    HamiltonianFlow(HamiltonianFlow),
    /// `(r, θ) ↦ (r, θ + c)` on the disk.
    DiskRotation(f64),
    /// `(r, θ) ↦ (r, θ + a1 r + a0)`.
    DiskTwist { a1: f64, a0: f64 },
    BumpTwist(BumpTwist),
}

impl Leaf {
    pub fn name(&self) -> &'static str {
        match self {
            Leaf::Identity => "identity",
            Leaf::Rotation(_) => "rotation",
            Leaf::Twist { .. } => "twist",
            Leaf::HamiltonianFlow(_) => "hamiltonian_flow",
            Leaf::DiskRotation(_) => "disk_rotation",
            Leaf::DiskTwist { .. } => "disk_twist",
            Leaf::BumpTwist(_) => "bump_twist",
        }
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self, Leaf::HamiltonianFlow(_))
    }

    pub fn lift_jac(&self, p: &Point) -> Result<(Point, Mat2)> {
        Ok(match self {
            Leaf::Identity => (*p, Mat2::identity()),
            Leaf::Rotation(c) | Leaf::DiskRotation(c) => (pt(p.x, p.y + c), Mat2::identity()),
            Leaf::Twist { a1, a0 } | Leaf::DiskTwist { a1, a0 } => {
                (pt(p.x, p.y + a1 * p.x + a0), Mat2::new(1.0, 0.0, *a1, 1.0))
            }
            Leaf::HamiltonianFlow(f) => return f.lift_jac(p),
            Leaf::BumpTwist(b) => b.lift_jac(p),
        })
    }

    pub fn lift(&self, p: &Point) -> Result<Point> {
        match self {
            Leaf::HamiltonianFlow(f) => f.lift(p),
            Leaf::BumpTwist(b) => Ok(b.lift(p)),
            _ => Ok(self.lift_jac(p)?.0),
        }
    }
}

/// Rotation about a center by `2π · profile(d / R)` radians, where `d` is
/// the distance to the center; points with `d ≥ R` stay put. On the disk
/// the center is given in polar coordinates and the rotation happens in the
/// Cartesian plane.
#[derive(Debug, Clone)]
pub struct BumpTwist {
    pub center: Point,
    pub radius: f64,
    pub profile: Expr,
    pub on_disk: bool,
    prog: Arc<(Program, Program)>,
    center_xy: Point,
}

impl PartialEq for BumpTwist {
    fn eq(&self, other: &Self) -> bool {
        self.center == other.center
            && self.radius == other.radius
            && self.profile == other.profile
            && self.on_disk == other.on_disk
    }
}

fn rot(a: f64) -> Mat2 {
    let (s, c) = a.sin_cos();
    Mat2::new(c, -s, s, c)
}

impl BumpTwist {
    pub fn new(center: Point, radius: f64, profile: Expr, on_disk: bool) -> Self {
        let p = profile.compile();
        let dp = profile.diff(Var::R).compile();
        let center_xy = if on_disk { polar_to_xy(&center) } else { center };
        Self { center, radius, profile, on_disk, prog: Arc::new((p, dp)), center_xy }
    }

    /// Profile value in turns at normalized distance `s`.
    pub fn profile_at(&self, s: f64) -> f64 {
        self.prog.0.eval(&Env::new(0.0, 0.0, s, 0.0))
    }

    fn profile_slope(&self, s: f64) -> f64 {
        self.prog.1.eval(&Env::new(0.0, 0.0, s, 0.0))
    }

    /// Planar rotation of the offset `v` and its derivative.
    fn rotate(&self, v: Point, with_jac: bool) -> Option<(Point, Mat2)> {
        let d = v.norm();
        if d >= self.radius {
            return None;
        }
        let s = d / self.radius;
        let alpha = TAU * self.profile_at(s);
        let r = rot(alpha);
        let w = r * v;
        if !with_jac || d == 0.0 {
            return Some((w, r));
        }
        let dalpha = TAU * self.profile_slope(s) / (self.radius * d);
        let jv = pt(-w.y, w.x);
        Some((w, r + jv * (v.transpose() * dalpha)))
    }

    fn lift_impl(&self, p: &Point, with_jac: bool) -> (Point, Mat2) {
        if !self.on_disk {
            let v = pt(p.x - self.center.x, wrap_half(p.y - self.center.y));
            return match self.rotate(v, with_jac) {
                None => (*p, Mat2::identity()),
                Some((w, j)) => (pt(self.center.x + w.x, p.y + (w.y - v.y)), j),
            };
        }
        let q = polar_to_xy(p);
        let Some((w, j)) = self.rotate(q - self.center_xy, with_jac) else {
            return (*p, Mat2::identity());
        };
        let q2 = self.center_xy + w;
        let r2 = q2.norm();
        let turn = q2.y.atan2(q2.x) / TAU;
        let out = pt(r2, p.y + wrap_half(turn - p.y));
        if !with_jac {
            return (out, j);
        }
        // Chain rule through the polar parametrization on both sides.
        let (s0, c0) = (TAU * p.y).sin_cos();
        let forward = Mat2::new(c0, -TAU * p.x * s0, s0, TAU * p.x * c0);
        let (s1, c1) = (TAU * out.y).sin_cos();
        let back = Mat2::new(c1, s1, -s1 / (TAU * r2), c1 / (TAU * r2));
        (out, back * j * forward)
    }

    pub fn lift_jac(&self, p: &Point) -> (Point, Mat2) {
        self.lift_impl(p, true)
    }

    pub fn lift(&self, p: &Point) -> Point {
        self.lift_impl(p, false).0
    }
}

pub(crate) fn polar_to_xy(p: &Point) -> Point {
    let (s, c) = (TAU * p.y).sin_cos();
    pt(p.x * c, p.x * s)
}
