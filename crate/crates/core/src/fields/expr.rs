//! Scalar generator expressions: parsing, printing, evaluation, and exact
//! symbolic first and second derivatives.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate context of an expression: `x1..xn, y1..yn` and, for the
/// Heisenberg model, `z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coords {
    pub n: usize,
    pub central: bool,
}

impl Coords {
    pub fn symplectic(n: usize) -> Self {
        Coords { n, central: false }
    }

    pub fn heisenberg(n: usize) -> Self {
        Coords { n, central: true }
    }

    pub fn dim(&self) -> usize {
        2 * self.n + usize::from(self.central)
    }

    pub fn name(&self, i: usize) -> String {
        if i < self.n {
            format!("x{}", i + 1)
        } else if i < 2 * self.n {
            format!("y{}", i - self.n + 1)
        } else {
            "z".to_string()
        }
    }

    fn lookup(&self, name: &str) -> Option<usize> {
        if name == "z" {
            return self.central.then_some(2 * self.n);
        }
        let (head, tail) = name.split_at(1);
        let k: usize = tail.parse().ok()?;
        if k == 0 || k > self.n || tail.starts_with('0') {
            return None;
        }
        match head {
            "x" => Some(k - 1),
            "y" => Some(self.n + k - 1),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    /// Radial cutoff in all context coordinates: 1 on `|p| ≤ r1`, 0 on `|p| ≥ r2`.
    Bump { r1: f64, r2: f64 },
    /// `∂ᵢ bump`; produced by differentiation only.
    BumpGrad { r1: f64, r2: f64, i: usize },
    /// `∂ᵢ∂ⱼ bump`; produced by differentiation only.
    BumpHess { r1: f64, r2: f64, i: usize, j: usize },
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            (Expr::Const(x), _) if *x == 0.0 => b,
            (_, Expr::Const(y)) if *y == 0.0 => a,
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
            (_, Expr::Const(y)) if *y == 0.0 => a,
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            (Expr::Const(x), _) | (_, Expr::Const(x)) if *x == 0.0 => Expr::Const(0.0),
            (Expr::Const(x), _) if *x == 1.0 => b,
            (_, Expr::Const(y)) if *y == 1.0 => a,
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (&a, &b) {
            (Expr::Const(x), _) if *x == 0.0 => Expr::Const(0.0),
            (_, Expr::Const(y)) if *y == 1.0 => a,
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(a: Expr, k: i32) -> Expr {
        match (&a, k) {
            (_, 0) => Expr::Const(1.0),
            (_, 1) => a,
            (Expr::Const(x), _) => Expr::Const(x.powi(k)),
            _ => Expr::Pow(Box::new(a), k),
        }
    }

    pub fn exp(a: Expr) -> Expr {
        Expr::Exp(Box::new(a))
    }

    pub fn sin(a: Expr) -> Expr {
        Expr::Sin(Box::new(a))
    }

    pub fn cos(a: Expr) -> Expr {
        Expr::Cos(Box::new(a))
    }

    pub fn bump(r1: f64, r2: f64) -> Expr {
        Expr::Bump { r1, r2 }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(v) if *v == 0.0)
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) | Expr::Bump { .. } | Expr::BumpGrad { .. } | Expr::BumpHess { .. } => None,
            Expr::Var(i) => Some(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
            Expr::Pow(a, _) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => a.max_var(),
        }
    }

    pub fn contains_bump(&self) -> bool {
        match self {
            Expr::Bump { .. } | Expr::BumpGrad { .. } | Expr::BumpHess { .. } => true,
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.contains_bump() || b.contains_bump()
            }
            Expr::Pow(a, _) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => a.contains_bump(),
        }
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Expr::Const(v) => *v,
            Expr::Var(i) => p[*i],
            Expr::Add(a, b) => a.eval(p) + b.eval(p),
            Expr::Sub(a, b) => a.eval(p) - b.eval(p),
            Expr::Mul(a, b) => a.eval(p) * b.eval(p),
            Expr::Div(a, b) => a.eval(p) / b.eval(p),
            Expr::Pow(a, k) => a.eval(p).powi(*k),
            Expr::Exp(a) => a.eval(p).exp(),
            Expr::Sin(a) => a.eval(p).sin(),
            Expr::Cos(a) => a.eval(p).cos(),
            Expr::Bump { r1, r2 } => radial_bump(*r1, *r2, p).value,
            Expr::BumpGrad { r1, r2, i } => radial_bump(*r1, *r2, p).grad(p, *i),
            Expr::BumpHess { r1, r2, i, j } => radial_bump(*r1, *r2, p).hess(p, *i, *j),
        }
    }

    /// Exact partial derivative with respect to variable `k`.
    pub fn diff(&self, k: usize) -> Result<Expr> {
        Ok(match self {
            Expr::Const(_) => Expr::c(0.0),
            Expr::Var(i) => Expr::c(if *i == k { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => Expr::add(a.diff(k)?, b.diff(k)?),
            Expr::Sub(a, b) => Expr::sub(a.diff(k)?, b.diff(k)?),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(k)?, (**b).clone()),
                Expr::mul((**a).clone(), b.diff(k)?),
            ),
            Expr::Div(a, b) => Expr::div(
                Expr::sub(
                    Expr::mul(a.diff(k)?, (**b).clone()),
                    Expr::mul((**a).clone(), b.diff(k)?),
                ),
                Expr::pow((**b).clone(), 2),
            ),
            Expr::Pow(a, e) => Expr::mul(
                Expr::mul(Expr::c(*e as f64), Expr::pow((**a).clone(), e - 1)),
                a.diff(k)?,
            ),
            Expr::Exp(a) => Expr::mul(self.clone(), a.diff(k)?),
            Expr::Sin(a) => Expr::mul(Expr::cos((**a).clone()), a.diff(k)?),
            Expr::Cos(a) => Expr::mul(
                Expr::mul(Expr::c(-1.0), Expr::sin((**a).clone())),
                a.diff(k)?,
            ),
            Expr::Bump { r1, r2 } => Expr::BumpGrad { r1: *r1, r2: *r2, i: k },
            Expr::BumpGrad { r1, r2, i } => Expr::BumpHess {
                r1: *r1,
                r2: *r2,
                i: *i,
                j: k,
            },
            Expr::BumpHess { .. } => {
                return Err(Error::UnsupportedDerivative(
                    "third derivatives of bump are not available".into(),
                ))
            }
        })
    }
}

fn fmt_number(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        write!(f, "({v:?})")
    } else {
        write!(f, "{v:?}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => fmt_number(*v, f),
            Expr::Var(i) => write!(f, "v{i}"),
            _ => write!(f, "{}", Printer { expr: self, coords: None }),
        }
    }
}

/// Fully parenthesised rendering with coordinate names; re-parses to the
/// same tree.
pub struct Printer<'a> {
    expr: &'a Expr,
    coords: Option<Coords>,
}

impl<'a> Printer<'a> {
    pub fn new(expr: &'a Expr, coords: Coords) -> Self {
        Printer {
            expr,
            coords: Some(coords),
        }
    }

    fn child(&self, expr: &'a Expr) -> Printer<'a> {
        Printer {
            expr,
            coords: self.coords,
        }
    }
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bin = |f: &mut fmt::Formatter<'_>, a: &Expr, op: &str, b: &Expr| {
            write!(f, "({} {op} {})", self.child(a), self.child(b))
        };
        match self.expr {
            Expr::Const(v) => fmt_number(*v, f),
            Expr::Var(i) => match self.coords {
                Some(c) => write!(f, "{}", c.name(*i)),
                None => write!(f, "v{i}"),
            },
            Expr::Add(a, b) => bin(f, a, "+", b),
            Expr::Sub(a, b) => bin(f, a, "-", b),
            Expr::Mul(a, b) => bin(f, a, "*", b),
            Expr::Div(a, b) => bin(f, a, "/", b),
            Expr::Pow(a, k) => write!(f, "({}^{k})", self.child(a)),
            Expr::Exp(a) => write!(f, "exp({})", self.child(a)),
            Expr::Sin(a) => write!(f, "sin({})", self.child(a)),
            Expr::Cos(a) => write!(f, "cos({})", self.child(a)),
            Expr::Bump { r1, r2 } => write!(f, "bump({r1:?}, {r2:?})"),
            Expr::BumpGrad { r1, r2, i } => write!(f, "bump_d{i}({r1:?}, {r2:?})"),
            Expr::BumpHess { r1, r2, i, j } => write!(f, "bump_d{i}d{j}({r1:?}, {r2:?})"),
        }
    }
}

/// A parsed generator together with its coordinate context.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarFieldSpec {
    pub expr: Expr,
    pub coords: Coords,
}

impl ScalarFieldSpec {
    pub fn new(expr: Expr, coords: Coords) -> Result<Self> {
        if let Some(m) = expr.max_var() {
            if m >= coords.dim() {
                return Err(Error::DimensionMismatch {
                    expected: coords.dim(),
                    got: m + 1,
                });
            }
        }
        Ok(ScalarFieldSpec { expr, coords })
    }

    pub fn parse(source: &str, coords: Coords) -> Result<Self> {
        let expr = Parser::new(source, coords).parse()?;
        Ok(ScalarFieldSpec { expr, coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.dim()
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.expr.eval(p)
    }

    pub fn gradient(&self) -> Result<Vec<Expr>> {
        (0..self.dim()).map(|k| self.expr.diff(k)).collect()
    }

    pub fn hessian(&self) -> Result<Vec<Vec<Expr>>> {
        self.gradient()?
            .iter()
            .map(|g| (0..self.dim()).map(|k| g.diff(k)).collect())
            .collect()
    }

    pub fn to_source(&self) -> String {
        Printer::new(&self.expr, self.coords).to_string()
    }
}

impl fmt::Display for ScalarFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Printer::new(&self.expr, self.coords))
    }
}

/// Parses `source` in the given coordinate context.
pub fn parse_field(source: &str, coords: Coords) -> Result<ScalarFieldSpec> {
    ScalarFieldSpec::parse(source, coords)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    coords: Coords,
}

impl<'a> Parser<'a> {
    fn new(source: &'a str, coords: Coords) -> Self {
        Parser {
            src: source.as_bytes(),
            pos: 0,
            coords,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn parse(mut self) -> Result<Expr> {
        if !self.src.is_ascii() {
            let pos = self.src.iter().position(|b| !b.is_ascii()).unwrap_or(0);
            return Err(Error::Syntax {
                pos,
                msg: "non-ASCII input".into(),
            });
        }
        let e = self.expr()?;
        if self.peek().is_some() {
            return self.err("unexpected trailing input");
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            if matches!(self.src.get(self.pos), Some(b'-' | b'+')) {
                self.pos += 1;
            }
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
            return match text.parse::<i32>() {
                Ok(k) => Ok(Expr::Pow(Box::new(base), k)),
                Err(_) => {
                    self.pos = start;
                    self.err("expected an integer exponent")
                }
            };
        }
        Ok(base)
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.src.get(self.pos), Some(b'-' | b'+')) {
            self.pos += 1;
        }
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return self.err("expected a number");
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'-' | b'+')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        text.parse::<f64>().or_else(|_| {
            self.pos = start;
            self.err("malformed number")
        })
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek() {
            None => self.err("unexpected end of input"),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::Const(self.number()?)),
            Some(b'-' | b'+') => {
                let negative = self.src[self.pos] == b'-';
                self.pos += 1;
                match self.peek() {
                    Some(c) if c.is_ascii_digit() || c == b'.' => {
                        let v = self.number()?;
                        Ok(Expr::Const(if negative { -v } else { v }))
                    }
                    _ => {
                        let b = self.factor()?;
                        Ok(if negative {
                            Expr::Mul(Box::new(Expr::Const(-1.0)), Box::new(b))
                        } else {
                            b
                        })
                    }
                }
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                match name {
                    "exp" | "sin" | "cos" => {
                        self.expect(b'(')?;
                        let arg = self.expr()?;
                        self.expect(b')')?;
                        Ok(match name {
                            "exp" => Expr::exp(arg),
                            "sin" => Expr::sin(arg),
                            _ => Expr::cos(arg),
                        })
                    }
                    "bump" => {
                        self.expect(b'(')?;
                        let r1 = self.constant_arg()?;
                        self.expect(b',')?;
                        let r2 = self.constant_arg()?;
                        self.expect(b')')?;
                        if !(r1 >= 0.0 && r1 < r2 && r2.is_finite()) {
                            return self.err(format!("bump radii must satisfy 0 <= r1 < r2, got ({r1}, {r2})"));
                        }
                        Ok(Expr::bump(r1, r2))
                    }
                    _ => match self.coords.lookup(name) {
                        Some(i) => Ok(Expr::Var(i)),
                        None => Err(Error::UnknownIdentifier {
                            name: name.to_string(),
                            pos: start,
                        }),
                    },
                }
            }
            Some(c) => self.err(format!("unexpected character '{}'", c as char)),
        }
    }

    fn constant_arg(&mut self) -> Result<f64> {
        let start = self.pos;
        let e = self.expr()?;
        if e.max_var().is_some() || e.contains_bump() {
            self.pos = start;
            return self.err("bump radii must be constant");
        }
        Ok(e.eval(&[]))
    }
}

/// Value and radial derivatives of the smoothstep cutoff at a point.
#[derive(Clone, Copy, Debug)]
pub struct RadialBump {
    pub value: f64,
    /// `db/dρ`
    pub d1: f64,
    /// `d²b/dρ²`
    pub d2: f64,
    pub rho: f64,
}

impl RadialBump {
    pub fn grad(&self, p: &[f64], i: usize) -> f64 {
        if self.d1 == 0.0 {
            return 0.0;
        }
        self.d1 * p[i] / self.rho
    }

    pub fn hess(&self, p: &[f64], i: usize, j: usize) -> f64 {
        if self.d1 == 0.0 && self.d2 == 0.0 {
            return 0.0;
        }
        let r = self.rho;
        let outer = p[i] * p[j] / (r * r);
        let delta = if i == j { 1.0 } else { 0.0 };
        self.d2 * outer + self.d1 * (delta - outer) / r
    }
}

/// `(e, e', e'')` of `e(s) = exp(−1/s)` for `s > 0`, zero otherwise.
fn flat_exp(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let e = (-1.0 / s).exp();
    let s2 = s * s;
    let d1 = e / s2;
    let d2 = e * (1.0 - 2.0 * s) / (s2 * s2);
    (e, d1, d2)
}

pub fn radial_bump(r1: f64, r2: f64, p: &[f64]) -> RadialBump {
    let rho = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    let width = r2 - r1;
    let t = (rho - r1) / width;
    if t <= 0.0 {
        return RadialBump { value: 1.0, d1: 0.0, d2: 0.0, rho };
    }
    if t >= 1.0 {
        return RadialBump { value: 0.0, d1: 0.0, d2: 0.0, rho };
    }
    // S(t) = A / (A + B) with A = e(1 − t), B = e(t)
    let (a, a1, a2) = flat_exp(1.0 - t);
    let (b, b1, b2) = flat_exp(t);
    let (da, dda) = (-a1, a2);
    let (db, ddb) = (b1, b2);
    let q = a + b;
    let dq = da + db;
    let ddq = dda + ddb;
    let s = a / q;
    let ds = (da - s * dq) / q;
    let dds = (dda - 2.0 * ds * dq - s * ddq) / q;
    RadialBump {
        value: s,
        d1: ds / width,
        d2: dds / (width * width),
        rho,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h1() -> Coords {
        Coords::heisenberg(1)
    }

    #[test]
    fn parses_and_evaluates() {
        let f = parse_field("2*z - x1*y1", h1()).unwrap();
        assert_eq!(f.eval(&[2.0, 3.0, 5.0]), 4.0);
        let g = parse_field("  exp( x1 ) * sin(y1)^2 / (1 + z^2) ", h1()).unwrap();
        let p = [0.3, -0.7, 0.2];
        let expected = 0.3f64.exp() * (-0.7f64).sin().powi(2) / 1.04;
        assert!((g.eval(&p) - expected).abs() < 1e-15);
        assert_eq!(parse_field("-2.5e-1 * x1", h1()).unwrap().eval(&[2.0, 0.0, 0.0]), -0.5);
        assert_eq!(parse_field("-x1 + 1", h1()).unwrap().eval(&[2.0, 0.0, 0.0]), -1.0);
    }

    #[test]
    fn reports_errors_with_positions() {
        match parse_field("x1 + w", h1()) {
            Err(Error::UnknownIdentifier { name, pos }) => {
                assert_eq!(name, "w");
                assert_eq!(pos, 5);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_field("z", Coords::symplectic(1)), Err(Error::UnknownIdentifier { .. })));
        assert!(matches!(parse_field("x2", h1()), Err(Error::UnknownIdentifier { .. })));
        assert!(matches!(parse_field("x1 +", h1()), Err(Error::Syntax { pos: 4, .. })));
        assert!(matches!(parse_field("x1 ^ 1.5", h1()), Err(Error::Syntax { .. })));
        assert!(matches!(parse_field("(x1", h1()), Err(Error::Syntax { .. })));
        assert!(matches!(parse_field("bump(x1, 2)", h1()), Err(Error::Syntax { .. })));
        assert!(matches!(parse_field("bump(2, 1)", h1()), Err(Error::Syntax { .. })));
        assert!(matches!(parse_field("x1 ÷ 2", h1()), Err(Error::Syntax { .. })));
    }

    #[test]
    fn printing_round_trips() {
        for src in [
            "2*z - x1*y1",
            "bump(1, 2) * y1",
            "exp(-x1^2 - y1^2) * cos(3*z) / (2 + sin(x1))",
            "x1^-2 + (-1.25) * z",
            "-y1 - -3",
        ] {
            let f = parse_field(src, h1()).unwrap();
            let printed = f.to_source();
            let again = parse_field(&printed, h1()).unwrap();
            assert_eq!(f, again, "{src} -> {printed}");
        }
    }

    #[test]
    fn bump_profile() {
        let b = |r: f64| radial_bump(1.0, 2.0, &[r, 0.0]).value;
        assert_eq!(b(0.0), 1.0);
        assert_eq!(b(1.0), 1.0);
        assert_eq!(b(2.0), 0.0);
        assert_eq!(b(3.0), 0.0);
        assert!((b(1.5) - 0.5).abs() < 1e-15);
        let mut last = 1.0;
        for k in 1..100 {
            let v = b(1.0 + k as f64 / 100.0);
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn bump_derivatives_match_differences() {
        let h = 1e-5;
        for p in [[1.2, 0.3, -0.1], [0.5, -1.0, 0.9], [1.0, 1.0, 0.2]] {
            let b = radial_bump(1.0, 2.0, &p);
            for i in 0..3 {
                let mut q = p;
                q[i] += h;
                let up = radial_bump(1.0, 2.0, &q);
                q[i] -= 2.0 * h;
                let dn = radial_bump(1.0, 2.0, &q);
                let fd = (up.value - dn.value) / (2.0 * h);
                assert!((b.grad(&p, i) - fd).abs() < 1e-7);
                for j in 0..3 {
                    let fd2 = (up.grad(&p_shift(&p, i, h), j) - dn.grad(&p_shift(&p, i, -h), j)) / (2.0 * h);
                    assert!((b.hess(&p, i, j) - fd2).abs() < 1e-6, "{p:?} {i} {j}");
                }
            }
        }
    }

    fn p_shift(p: &[f64; 3], i: usize, h: f64) -> [f64; 3] {
        let mut q = *p;
        q[i] += h;
        q
    }

    #[test]
    fn third_bump_derivative_is_unsupported() {
        let f = parse_field("bump(1, 2)", h1()).unwrap();
        let h = f.hessian().unwrap();
        assert!(matches!(h[0][1].diff(2), Err(Error::UnsupportedDerivative(_))));
    }
}
