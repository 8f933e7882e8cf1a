//! Compiled expression tapes evaluated with forward-mode jets.
//!
//! A [`Tape`] is a flat instruction list; evaluating it over [`Dual`] yields
//! the value and gradient, over [`Jet`] the value, gradient and Hessian. The
//! derivatives are exact, matching the symbolic ones up to rounding.

use super::expr::{radial_bump, Expr, RadialBump};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
enum Op {
    Const(f64),
    Var(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Powi(usize, i32),
    Exp(usize),
    Sin(usize),
    Cos(usize),
    Bump(f64, f64),
}

#[derive(Clone, Debug)]
pub struct Tape {
    ops: Vec<Op>,
}

impl Tape {
    pub fn compile(expr: &Expr) -> Result<Tape> {
        let mut ops = Vec::new();
        emit(expr, &mut ops)?;
        Ok(Tape { ops })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn eval<N: Number>(&self, p: &[f64], buf: &mut Vec<N>) -> N {
        buf.clear();
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => N::constant(c),
                Op::Var(i) => N::variable(i, p),
                Op::Add(a, b) => buf[a].add(buf[b]),
                Op::Sub(a, b) => buf[a].sub(buf[b]),
                Op::Mul(a, b) => buf[a].mul(buf[b]),
                Op::Div(a, b) => {
                    let d = buf[b].value();
                    let inv = buf[b].chain(1.0 / d, -1.0 / (d * d), 2.0 / (d * d * d));
                    buf[a].mul(inv)
                }
                Op::Powi(a, k) => {
                    let x = buf[a].value();
                    let kf = k as f64;
                    let f1 = if k == 0 { 0.0 } else { kf * x.powi(k - 1) };
                    let f2 = if k == 0 || k == 1 { 0.0 } else { kf * (kf - 1.0) * x.powi(k - 2) };
                    buf[a].chain(x.powi(k), f1, f2)
                }
                Op::Exp(a) => {
                    let e = buf[a].value().exp();
                    buf[a].chain(e, e, e)
                }
                Op::Sin(a) => {
                    let (s, c) = buf[a].value().sin_cos();
                    buf[a].chain(s, c, -s)
                }
                Op::Cos(a) => {
                    let (s, c) = buf[a].value().sin_cos();
                    buf[a].chain(c, -s, -c)
                }
                Op::Bump(r1, r2) => N::bump(&radial_bump(r1, r2, p), p),
            };
            buf.push(v);
        }
        *buf.last().expect("tape is never empty")
    }
}

fn emit(expr: &Expr, ops: &mut Vec<Op>) -> Result<usize> {
    let bin = |a: &Expr, b: &Expr, ops: &mut Vec<Op>, f: fn(usize, usize) -> Op| -> Result<usize> {
        let ia = emit(a, ops)?;
        let ib = emit(b, ops)?;
        ops.push(f(ia, ib));
        Ok(ops.len() - 1)
    };
    match expr {
        Expr::Const(c) => ops.push(Op::Const(*c)),
        Expr::Var(i) => ops.push(Op::Var(*i)),
        Expr::Add(a, b) => return bin(a, b, ops, Op::Add),
        Expr::Sub(a, b) => return bin(a, b, ops, Op::Sub),
        Expr::Mul(a, b) => return bin(a, b, ops, Op::Mul),
        Expr::Div(a, b) => return bin(a, b, ops, Op::Div),
        Expr::Pow(a, k) => {
            let ia = emit(a, ops)?;
            ops.push(Op::Powi(ia, *k));
        }
        Expr::Exp(a) => {
            let ia = emit(a, ops)?;
            ops.push(Op::Exp(ia));
        }
        Expr::Sin(a) => {
            let ia = emit(a, ops)?;
            ops.push(Op::Sin(ia));
        }
        Expr::Cos(a) => {
            let ia = emit(a, ops)?;
            ops.push(Op::Cos(ia));
        }
        Expr::Bump { r1, r2 } => ops.push(Op::Bump(*r1, *r2)),
        Expr::BumpGrad { .. } | Expr::BumpHess { .. } => {
            return Err(Error::UnsupportedDerivative(
                "bump derivative nodes cannot be compiled".into(),
            ))
        }
    }
    Ok(ops.len() - 1)
}

/// Scalar types a [`Tape`] can be evaluated over.
pub trait Number: Copy {
    fn constant(v: f64) -> Self;
    fn variable(i: usize, p: &[f64]) -> Self;
    fn bump(b: &RadialBump, p: &[f64]) -> Self;
    fn value(&self) -> f64;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    /// `φ(self)` given `φ`, `φ'` and `φ''` at `self.value()`.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self;
}

impl Number for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn variable(i: usize, p: &[f64]) -> Self {
        p[i]
    }
    fn bump(b: &RadialBump, _p: &[f64]) -> Self {
        b.value
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn chain(self, f0: f64, _f1: f64, _f2: f64) -> Self {
        f0
    }
}

/// Value and gradient.
#[derive(Clone, Copy, Debug)]
pub struct Dual<const D: usize> {
    pub v: f64,
    pub g: [f64; D],
}

impl<const D: usize> Number for Dual<D> {
    fn constant(v: f64) -> Self {
        Dual { v, g: [0.0; D] }
    }
    fn variable(i: usize, p: &[f64]) -> Self {
        let mut g = [0.0; D];
        g[i] = 1.0;
        Dual { v: p[i], g }
    }
    fn bump(b: &RadialBump, p: &[f64]) -> Self {
        let mut g = [0.0; D];
        if b.d1 != 0.0 {
            for (i, gi) in g.iter_mut().enumerate() {
                *gi = b.grad(p, i);
            }
        }
        Dual { v: b.value, g }
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for i in 0..D {
            self.g[i] += o.g[i];
        }
        self
    }
    fn sub(mut self, o: Self) -> Self {
        self.v -= o.v;
        for i in 0..D {
            self.g[i] -= o.g[i];
        }
        self
    }
    fn mul(self, o: Self) -> Self {
        let mut g = [0.0; D];
        for i in 0..D {
            g[i] = self.v * o.g[i] + o.v * self.g[i];
        }
        Dual { v: self.v * o.v, g }
    }
    fn chain(mut self, f0: f64, f1: f64, _f2: f64) -> Self {
        self.v = f0;
        for gi in self.g.iter_mut() {
            *gi *= f1;
        }
        self
    }
}

/// Value, gradient and Hessian.
#[derive(Clone, Copy, Debug)]
pub struct Jet<const D: usize> {
    pub v: f64,
    pub g: [f64; D],
    pub h: [[f64; D]; D],
}

impl<const D: usize> Number for Jet<D> {
    fn constant(v: f64) -> Self {
        Jet {
            v,
            g: [0.0; D],
            h: [[0.0; D]; D],
        }
    }
    fn variable(i: usize, p: &[f64]) -> Self {
        let mut j = Self::constant(p[i]);
        j.g[i] = 1.0;
        j
    }
    fn bump(b: &RadialBump, p: &[f64]) -> Self {
        let mut j = Self::constant(b.value);
        if b.d1 != 0.0 || b.d2 != 0.0 {
            for i in 0..D {
                j.g[i] = b.grad(p, i);
                for k in 0..D {
                    j.h[i][k] = b.hess(p, i, k);
                }
            }
        }
        j
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for i in 0..D {
            self.g[i] += o.g[i];
            for k in 0..D {
                self.h[i][k] += o.h[i][k];
            }
        }
        self
    }
    fn sub(mut self, o: Self) -> Self {
        self.v -= o.v;
        for i in 0..D {
            self.g[i] -= o.g[i];
            for k in 0..D {
                self.h[i][k] -= o.h[i][k];
            }
        }
        self
    }
    fn mul(self, o: Self) -> Self {
        let mut r = Self::constant(self.v * o.v);
        for i in 0..D {
            r.g[i] = self.v * o.g[i] + o.v * self.g[i];
            for k in 0..D {
                r.h[i][k] = self.v * o.h[i][k]
                    + o.v * self.h[i][k]
                    + self.g[i] * o.g[k]
                    + o.g[i] * self.g[k];
            }
        }
        r
    }
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut r = Self::constant(f0);
        for i in 0..D {
            r.g[i] = f1 * self.g[i];
            for k in 0..D {
                r.h[i][k] = f1 * self.h[i][k] + f2 * self.g[i] * self.g[k];
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::expr::{parse_field, Coords};

    #[test]
    fn jets_match_symbolic_derivatives() {
        let coords = Coords::heisenberg(1);
        for src in [
            "2*z - x1*y1",
            "bump(0.3, 1.5) * (0.4 + y1 - 2*x1*z)",
            "exp(x1*y1) / (2 + cos(z)) - sin(y1)^3 + x1^-1",
        ] {
            let f = parse_field(src, coords).unwrap();
            let tape = Tape::compile(&f.expr).unwrap();
            let grad = f.gradient().unwrap();
            let hess = f.hessian().unwrap();
            let p = [0.7, -0.4, 0.25];
            let mut buf = Vec::new();
            let j: Jet<3> = tape.eval(&p, &mut buf);
            let mut dbuf = Vec::new();
            let d: Dual<3> = tape.eval(&p, &mut dbuf);
            assert!((j.v - f.eval(&p)).abs() < 1e-13);
            for i in 0..3 {
                assert!((j.g[i] - grad[i].eval(&p)).abs() < 1e-12, "{src} g{i}");
                assert!((d.g[i] - j.g[i]).abs() < 1e-14);
                for k in 0..3 {
                    assert!((j.h[i][k] - hess[i][k].eval(&p)).abs() < 1e-11, "{src} h{i}{k}");
                }
            }
        }
    }
}
