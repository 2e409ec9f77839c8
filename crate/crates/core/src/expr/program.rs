use super::{apply, bump, Expr, Func, Var};

/// Variable bindings for evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Env {
    vals: [f64; 4],
}

impl Env {
    pub fn new(x: f64, y: f64, r: f64, theta: f64) -> Self {
        Self { vals: [x, y, r, theta] }
    }

    /// Binds both the Cartesian and the polar name of each coordinate to the
    /// same value, so one expression body works on either chart.
    pub fn chart(first: f64, second: f64) -> Self {
        Self::new(first, second, first, second)
    }

    pub fn get(&self, v: Var) -> f64 {
        self.vals[v.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Var(usize),
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    PowI(i32),
    Pow,
    Call(Func),
}

const STACK: usize = 64;

/// An expression flattened to postfix form.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    ops: Vec<Op>,
    depth: usize,
}

impl Program {
    pub fn compile(e: &Expr) -> Program {
        let mut ops = Vec::new();
        emit(e, &mut ops);
        let mut depth = 0usize;
        let mut max = 0usize;
        for op in &ops {
            match op {
                Op::Const(_) | Op::Var(_) => depth += 1,
                Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Pow => depth -= 1,
                Op::Neg | Op::PowI(_) | Op::Call(_) => {}
            }
            max = max.max(depth);
        }
        Program { ops, depth: max }
    }

    pub fn eval(&self, env: &Env) -> f64 {
        if self.depth > STACK {
            return self.eval_heap(env);
        }
        let mut stack = [0.0f64; STACK];
        let mut sp = 0usize;
        for op in &self.ops {
            step(op, &mut stack, &mut sp, env);
        }
        stack[0]
    }

    fn eval_heap(&self, env: &Env) -> f64 {
        let mut stack = vec![0.0f64; self.depth];
        let mut sp = 0usize;
        for op in &self.ops {
            step(op, &mut stack, &mut sp, env);
        }
        stack[0]
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_constant_zero(&self) -> bool {
        matches!(self.ops.as_slice(), [Op::Const(v)] if *v == 0.0)
    }
}

/// Value, gradient and Hessian `(xx, xy, yy)` with respect to the two
/// chart coordinates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub g: [f64; 2],
    pub h: [f64; 3],
}

impl Jet2 {
    fn constant(v: f64) -> Self {
        Jet2 { v, ..Default::default() }
    }

    fn coord(v: f64, i: usize) -> Self {
        let mut g = [0.0; 2];
        g[i] = 1.0;
        Jet2 { v, g, h: [0.0; 3] }
    }

    /// `f ∘ self` given `f`, `f'`, `f''` at `self.v`.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let [gx, gy] = self.g;
        Jet2 {
            v: f0,
            g: [f1 * gx, f1 * gy],
            h: [
                f1 * self.h[0] + f2 * gx * gx,
                f1 * self.h[1] + f2 * gx * gy,
                f1 * self.h[2] + f2 * gy * gy,
            ],
        }
    }

    fn add(self, o: Self, sign: f64) -> Self {
        Jet2 {
            v: self.v + sign * o.v,
            g: [self.g[0] + sign * o.g[0], self.g[1] + sign * o.g[1]],
            h: [self.h[0] + sign * o.h[0], self.h[1] + sign * o.h[1], self.h[2] + sign * o.h[2]],
        }
    }

    fn mul(self, o: Self) -> Self {
        let (a, b) = (self, o);
        Jet2 {
            v: a.v * b.v,
            g: [a.g[0] * b.v + a.v * b.g[0], a.g[1] * b.v + a.v * b.g[1]],
            h: [
                a.h[0] * b.v + 2.0 * a.g[0] * b.g[0] + a.v * b.h[0],
                a.h[1] * b.v + a.g[0] * b.g[1] + a.g[1] * b.g[0] + a.v * b.h[1],
                a.h[2] * b.v + 2.0 * a.g[1] * b.g[1] + a.v * b.h[2],
            ],
        }
    }

    fn recip(self) -> Self {
        let t = self.v;
        self.chain(1.0 / t, -1.0 / (t * t), 2.0 / (t * t * t))
    }

    fn powi(self, n: i32) -> Self {
        let t = self.v;
        let nf = n as f64;
        let (d1, d2) = match n {
            0 => (0.0, 0.0),
            1 => (1.0, 0.0),
            _ => (nf * t.powi(n - 1), nf * (nf - 1.0) * t.powi(n - 2)),
        };
        self.chain(t.powi(n), d1, d2)
    }

    fn call(self, f: Func) -> Self {
        let t = self.v;
        match f {
            Func::Sin => self.chain(t.sin(), t.cos(), -t.sin()),
            Func::Cos => self.chain(t.cos(), -t.sin(), -t.cos()),
            Func::Exp => {
                let e = t.exp();
                self.chain(e, e, e)
            }
            Func::Sqrt => {
                let s = t.sqrt();
                self.chain(s, 0.5 / s, -0.25 / (s * t))
            }
            Func::Ln => self.chain(t.ln(), 1.0 / t, -1.0 / (t * t)),
            Func::Bump(n) => self.chain(bump(t, n), bump(t, n + 1), bump(t, n + 2)),
        }
    }
}

impl Program {
    /// Second-order forward-mode evaluation. `x`/`r` are the first
    /// coordinate, `y`/`theta` the second.
    pub fn eval_jet2(&self, first: f64, second: f64) -> Jet2 {
        const INLINE: usize = 24;
        let mut inline = [Jet2::default(); INLINE];
        let mut heap = Vec::new();
        let stack: &mut [Jet2] = if self.depth <= INLINE {
            &mut inline
        } else {
            heap.resize(self.depth, Jet2::default());
            &mut heap
        };
        let mut sp = 0usize;
        for op in &self.ops {
            match *op {
                Op::Const(v) => {
                    stack[sp] = Jet2::constant(v);
                    sp += 1;
                }
                Op::Var(i) => {
                    stack[sp] = if i % 2 == 0 { Jet2::coord(first, 0) } else { Jet2::coord(second, 1) };
                    sp += 1;
                }
                Op::Neg => stack[sp - 1] = Jet2::constant(0.0).add(stack[sp - 1], -1.0),
                Op::PowI(n) => stack[sp - 1] = stack[sp - 1].powi(n),
                Op::Call(f) => stack[sp - 1] = stack[sp - 1].call(f),
                Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Pow => {
                    sp -= 1;
                    let (a, b) = (stack[sp - 1], stack[sp]);
                    stack[sp - 1] = match op {
                        Op::Add => a.add(b, 1.0),
                        Op::Sub => a.add(b, -1.0),
                        Op::Mul => a.mul(b),
                        Op::Div => a.mul(b.recip()),
                        _ => a.call(Func::Ln).mul(b).call(Func::Exp),
                    };
                }
            }
        }
        stack[0]
    }
}

#[inline]
fn step(op: &Op, stack: &mut [f64], sp: &mut usize, env: &Env) {
    match *op {
        Op::Const(v) => {
            stack[*sp] = v;
            *sp += 1;
        }
        Op::Var(i) => {
            stack[*sp] = env.vals[i];
            *sp += 1;
        }
        Op::Neg => stack[*sp - 1] = -stack[*sp - 1],
        Op::PowI(n) => stack[*sp - 1] = stack[*sp - 1].powi(n),
        Op::Call(f) => stack[*sp - 1] = apply(f, stack[*sp - 1]),
        Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Pow => {
            *sp -= 1;
            let b = stack[*sp];
            let a = &mut stack[*sp - 1];
            *a = match op {
                Op::Add => *a + b,
                Op::Sub => *a - b,
                Op::Mul => *a * b,
                Op::Div => *a / b,
                _ => super::pow(*a, b),
            };
        }
    }
}

fn emit(e: &Expr, ops: &mut Vec<Op>) {
    match e {
        Expr::Const(v) => ops.push(Op::Const(*v)),
        Expr::Pi => ops.push(Op::Const(std::f64::consts::PI)),
        Expr::Var(v) => ops.push(Op::Var(v.index())),
        Expr::Neg(a) => {
            emit(a, ops);
            ops.push(Op::Neg);
        }
        Expr::Call(f, a) => {
            emit(a, ops);
            ops.push(Op::Call(*f));
        }
        Expr::Pow(a, b) => {
            emit(a, ops);
            match b.constant_value() {
                Some(n) if n.fract() == 0.0 && n.abs() <= 64.0 => ops.push(Op::PowI(n as i32)),
                _ => {
                    emit(b, ops);
                    ops.push(Op::Pow);
                }
            }
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            emit(a, ops);
            emit(b, ops);
            ops.push(match e {
                Expr::Add(..) => Op::Add,
                Expr::Sub(..) => Op::Sub,
                Expr::Mul(..) => Op::Mul,
                _ => Op::Div,
            });
        }
    }
}
