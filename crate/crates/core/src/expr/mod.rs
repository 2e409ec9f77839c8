//! Scalar expressions over chart coordinates: parsing, symbolic
//! differentiation and a compiled stack evaluator.
//!
//! Identifiers: `x`, `y`, `r`, `theta`, `pi`. Functions: `sin`, `cos`, `exp`,
//! `sqrt`, `bump`. Operators: `+ - * / ^` with `^` right associative and
//! binding tighter than unary minus.

mod program;
pub mod syntax;

use std::fmt;

pub use program::{Env, Jet2, Program};
use syntax::{BinOp, Node, Syntax, SyntaxError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
    R,
    Theta,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::R => "r",
            Var::Theta => "theta",
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }

    fn from_name(s: &str) -> Option<Var> {
        Some(match s {
            "x" => Var::X,
            "y" => Var::Y,
            "r" => Var::R,
            "theta" => Var::Theta,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    /// Natural log; only produced by differentiation, not parseable.
    Ln,
    /// The canonical C² cutoff and its derivatives: order 0 is `bump`.
    Bump(u8),
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "bump" => Func::Bump(0),
            _ => return None,
        })
    }

    fn name(self) -> String {
        match self {
            Func::Sin => "sin".into(),
            Func::Cos => "cos".into(),
            Func::Exp => "exp".into(),
            Func::Sqrt => "sqrt".into(),
            Func::Ln => "ln".into(),
            Func::Bump(0) => "bump".into(),
            Func::Bump(n) => format!("bump_d{n}"),
        }
    }
}

/// Quintic smoothstep cutoff: 1 for t <= 0, 0 for t >= 1, and
/// 1 - 10t³ + 15t⁴ - 6t⁵ in between (C² at both ends).
pub const BUMP_COEFFS: [f64; 6] = [1.0, 0.0, 0.0, -10.0, 15.0, -6.0];

/// `order`-th derivative of the canonical bump at `t`.
pub fn bump(t: f64, order: u8) -> f64 {
    if t <= 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    if t >= 1.0 {
        return 0.0;
    }
    let mut c = BUMP_COEFFS;
    let mut len = c.len();
    for _ in 0..order.min(len as u8) {
        for k in 1..len {
            c[k - 1] = c[k] * k as f64;
        }
        len -= 1;
    }
    if (order as usize) >= BUMP_COEFFS.len() {
        return 0.0;
    }
    c[..len].iter().rev().fold(0.0, |acc, a| acc * t + a)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Pi,
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Parses a standalone expression.
    pub fn parse(src: &str) -> Result<Expr, SyntaxError> {
        let mut p = syntax::Parser::new(src)?;
        let node = p.expression()?;
        p.finish()?;
        Expr::from_syntax(&node)
    }

    /// Converts a syntax node, rejecting map constructors and tuples.
    pub fn from_syntax(node: &Node) -> Result<Expr, SyntaxError> {
        Ok(match &node.syntax {
            Syntax::Num(v) => Expr::Const(*v),
            Syntax::Ident(name) if name == "pi" => Expr::Pi,
            Syntax::Ident(name) => match Var::from_name(name) {
                Some(v) => Expr::Var(v),
                None => return Err(SyntaxError::new(node.offset, format!("unknown identifier `{name}`"))),
            },
            Syntax::Call { name, args } => {
                let Some(f) = Func::from_name(name) else {
                    return Err(SyntaxError::new(node.offset, format!("unknown function `{name}`")));
                };
                if args.len() != 1 {
                    return Err(SyntaxError::new(
                        node.offset,
                        format!("arity: `{name}` expects 1 argument, got {}", args.len()),
                    ));
                }
                Expr::Call(f, Box::new(Expr::from_syntax(&args[0])?))
            }
            Syntax::Tuple(_) => {
                return Err(SyntaxError::new(node.offset, "a tuple is not a scalar expression"));
            }
            Syntax::Neg(inner) => Expr::Neg(Box::new(Expr::from_syntax(inner)?)),
            Syntax::Binary { op, lhs, rhs } => {
                let l = Box::new(Expr::from_syntax(lhs)?);
                let r = Box::new(Expr::from_syntax(rhs)?);
                match op {
                    BinOp::Add => Expr::Add(l, r),
                    BinOp::Sub => Expr::Sub(l, r),
                    BinOp::Mul => Expr::Mul(l, r),
                    BinOp::Div => Expr::Div(l, r),
                    BinOp::Pow => Expr::Pow(l, r),
                }
            }
        })
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    /// Variables referenced anywhere in the expression, sorted.
    pub fn variables(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Var(v) => out.push(*v),
            Expr::Const(_) | Expr::Pi => {}
            Expr::Neg(a) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Value of a variable-free expression.
    pub fn constant_value(&self) -> Option<f64> {
        if self.variables().is_empty() {
            Some(self.eval(&Env::default()))
        } else {
            None
        }
    }

    /// Tree-walking evaluation; use [`Program`] on hot paths.
    pub fn eval(&self, env: &Env) -> f64 {
        match self {
            Expr::Const(v) => *v,
            Expr::Pi => std::f64::consts::PI,
            Expr::Var(v) => env.get(*v),
            Expr::Neg(a) => -a.eval(env),
            Expr::Add(a, b) => a.eval(env) + b.eval(env),
            Expr::Sub(a, b) => a.eval(env) - b.eval(env),
            Expr::Mul(a, b) => a.eval(env) * b.eval(env),
            Expr::Div(a, b) => a.eval(env) / b.eval(env),
            Expr::Pow(a, b) => pow(a.eval(env), b.eval(env)),
            Expr::Call(f, a) => apply(*f, a.eval(env)),
        }
    }

    /// Symbolic partial derivative with light algebraic simplification.
    pub fn diff(&self, v: Var) -> Expr {
        use Expr::*;
        match self {
            Const(_) | Pi => Const(0.0),
            Var(w) => Const(if *w == v { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.diff(v)),
            Add(a, b) => add(a.diff(v), b.diff(v)),
            Sub(a, b) => sub(a.diff(v), b.diff(v)),
            Mul(a, b) => add(mul(a.diff(v), (**b).clone()), mul((**a).clone(), b.diff(v))),
            Div(a, b) => {
                let num = sub(mul(a.diff(v), (**b).clone()), mul((**a).clone(), b.diff(v)));
                div(num, pow_e((**b).clone(), Const(2.0)))
            }
            Pow(a, b) => {
                let db = b.diff(v);
                if is_zero(&db) {
                    // d(u^n) = n u^(n-1) u'
                    let n = (**b).clone();
                    let nm1 = sub(n.clone(), Const(1.0));
                    mul(mul(n, pow_e((**a).clone(), nm1)), a.diff(v))
                } else {
                    // d(u^w) = u^w (w' ln u + w u'/u)
                    let u = (**a).clone();
                    let w = (**b).clone();
                    let inner = add(
                        mul(db, call(Func::Ln, u.clone())),
                        div(mul(w.clone(), a.diff(v)), u.clone()),
                    );
                    mul(pow_e(u, w), inner)
                }
            }
            Call(f, a) => {
                let da = a.diff(v);
                if is_zero(&da) {
                    return Const(0.0);
                }
                let a0 = (**a).clone();
                let outer = match f {
                    Func::Sin => call(Func::Cos, a0),
                    Func::Cos => neg(call(Func::Sin, a0)),
                    Func::Exp => call(Func::Exp, a0),
                    Func::Sqrt => div(Const(0.5), call(Func::Sqrt, a0)),
                    Func::Ln => div(Const(1.0), a0),
                    Func::Bump(n) => call(Func::Bump(n + 1), a0),
                };
                mul(outer, da)
            }
        }
    }

    pub fn compile(&self) -> Program {
        Program::compile(self)
    }
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Const(v) if *v == 0.0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Const(v) if *v == 1.0)
}

fn as_const(e: &Expr) -> Option<f64> {
    match e {
        Expr::Const(v) => Some(*v),
        _ => None,
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(v) => Expr::Const(-v),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => Expr::Const(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => Expr::Const(x - y),
        (Some(x), _) if x == 0.0 => neg(b),
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) || is_zero(&b) {
        return Expr::Const(0.0);
    }
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => Expr::Const(x * y),
        _ if is_one(&a) => b,
        _ if is_one(&b) => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        return Expr::Const(0.0);
    }
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => Expr::Const(x / y),
        _ if is_one(&b) => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow_e(a: Expr, b: Expr) -> Expr {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => Expr::Const(pow(x, y)),
        (_, Some(y)) if y == 1.0 => a,
        (_, Some(y)) if y == 0.0 => Expr::Const(1.0),
        _ => Expr::Pow(Box::new(a), Box::new(b)),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    match as_const(&a) {
        Some(x) => Expr::Const(apply(f, x)),
        None => Expr::Call(f, Box::new(a)),
    }
}

pub(crate) fn pow(base: f64, exp: f64) -> f64 {
    if exp.fract() == 0.0 && exp.abs() <= i32::MAX as f64 {
        base.powi(exp as i32)
    } else {
        base.powf(exp)
    }
}

pub(crate) fn apply(f: Func, a: f64) -> f64 {
    match f {
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Exp => a.exp(),
        Func::Sqrt => a.sqrt(),
        Func::Ln => a.ln(),
        Func::Bump(n) => bump(a, n),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => write!(f, "(-{})", -v),
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Pi => write!(f, "pi"),
            Expr::Var(v) => write!(f, "{}", v.name()),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(x: f64, y: f64) -> Env {
        Env::new(x, y, 0.0, 0.0)
    }

    #[test]
    fn bump_profile_values_and_smoothness() {
        assert_eq!(bump(-0.5, 0), 1.0);
        assert_eq!(bump(1.5, 0), 0.0);
        assert!((bump(0.5, 0) - 0.5).abs() < 1e-15);
        for order in 1..=2 {
            assert!(bump(1e-12, order).abs() < 1e-9);
            assert!(bump(1.0 - 1e-12, order).abs() < 1e-9);
        }
        // Finite-difference oracle for the derivative chain.
        let h = 1e-6;
        for &t in &[0.1, 0.37, 0.8] {
            for order in 0..3u8 {
                let fd = (bump(t + h, order) - bump(t - h, order)) / (2.0 * h);
                assert!((fd - bump(t, order + 1)).abs() < 1e-6, "t={t} order={order}");
            }
        }
    }

    #[test]
    fn parse_and_evaluate() {
        let e = Expr::parse("2*x^2 - sin(pi*y) + sqrt(4)").unwrap();
        let v = e.eval(&env(3.0, 0.5));
        assert!((v - (18.0 - 1.0 + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn unknown_identifier_is_rejected() {
        let err = Expr::parse("x + zeta").unwrap_err();
        assert_eq!(err.offset, 4);
        let err = Expr::parse("sin(x, y)").unwrap_err();
        assert!(err.message.contains("arity"));
    }

    #[test]
    fn display_round_trips() {
        for src in ["-x^2 + 3*y", "bump(1 + ((x-0.5)^2 - 0.09)/0.02)", "(-0.5)*cos(2*pi*y)/x", "1e-7*x"] {
            let e = Expr::parse(src).unwrap();
            let back = Expr::parse(&e.to_string()).unwrap();
            assert_eq!(e, back, "{src}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let e = Expr::parse("(0.09 - (x-0.5)^2 - (y-0.5)^2) * bump(1 + ((x-0.5)^2 + (y-0.5)^2 - 0.09)/0.02) + x*sin(2*pi*y)/(1+x^2)")
            .unwrap();
        let h = 1e-6;
        for &(x, y) in &[(0.3, 0.4), (0.52, 0.61), (0.1, 0.9), (0.45, 0.28)] {
            let dx = e.diff(Var::X).eval(&env(x, y));
            let dy = e.diff(Var::Y).eval(&env(x, y));
            let fdx = (e.eval(&env(x + h, y)) - e.eval(&env(x - h, y))) / (2.0 * h);
            let fdy = (e.eval(&env(x, y + h)) - e.eval(&env(x, y - h))) / (2.0 * h);
            assert!((dx - fdx).abs() < 1e-7, "dx at ({x},{y}): {dx} vs {fdx}");
            assert!((dy - fdy).abs() < 1e-7, "dy at ({x},{y}): {dy} vs {fdy}");
        }
    }

    #[test]
    fn simplification_drops_dead_terms() {
        let e = Expr::parse("x^2 + 3").unwrap();
        assert_eq!(e.diff(Var::Y), Expr::Const(0.0));
        assert_eq!(e.diff(Var::X).to_string(), "(2 * x)");
    }
}
