use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::expr::{Coords, Expr, ScalarFieldSpec};
use super::jet::{Dual, Jet, Tape};
use crate::error::{Error, Result};
use crate::geometry::CoordBox;

/// Largest supported ambient dimension (`n ≤ 4` on `Hₙ`).
pub const MAX_DIM: usize = 9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FieldKind {
    /// `X_f ⌟ ω₀ = df`, i.e. `X = (∂f/∂y, −∂f/∂x)`.
    Hamiltonian(ScalarFieldSpec),
    /// `α₀(X) = f` and `X ⌟ dα₀ = df(R)α₀ − df`.
    Contact(ScalarFieldSpec),
    Explicit(Vec<ScalarFieldSpec>),
}

/// A vector field on `ℝ²ⁿ` or `Hₙ` with exact Jacobian.
///
/// When `domain` is set the field vanishes outside it, and points starting
/// outside are left fixed by the flow without integration.
#[derive(Clone, Debug)]
pub struct VectorFieldSpec {
    pub kind: FieldKind,
    pub coords: Coords,
    pub domain: Option<CoordBox>,
    tapes: Vec<Tape>,
}

pub(crate) struct Scratch<const D: usize> {
    real: Vec<f64>,
    dual: Vec<Dual<D>>,
    jet: Vec<Jet<D>>,
}

impl<const D: usize> Scratch<D> {
    pub fn new() -> Self {
        Scratch {
            real: Vec::new(),
            dual: Vec::new(),
            jet: Vec::new(),
        }
    }
}

pub fn hamiltonian_field(f: &ScalarFieldSpec, n: usize) -> Result<VectorFieldSpec> {
    if f.coords != Coords::symplectic(n) {
        return Err(Error::Precondition(format!(
            "Hamiltonian generators live on R^{}, got a {}-dimensional context",
            2 * n,
            f.coords.dim()
        )));
    }
    VectorFieldSpec::build(FieldKind::Hamiltonian(f.clone()), f.coords)
}

pub fn contact_field(f: &ScalarFieldSpec, n: usize) -> Result<VectorFieldSpec> {
    if f.coords != Coords::heisenberg(n) {
        return Err(Error::Precondition(format!(
            "contact generators live on H_{n}, got a {}-dimensional context",
            f.coords.dim()
        )));
    }
    VectorFieldSpec::build(FieldKind::Contact(f.clone()), f.coords)
}

pub fn explicit_field(components: Vec<ScalarFieldSpec>) -> Result<VectorFieldSpec> {
    let coords = components
        .first()
        .map(|c| c.coords)
        .ok_or_else(|| Error::Precondition("explicit field needs components".into()))?;
    if components.len() != coords.dim() || components.iter().any(|c| c.coords != coords) {
        return Err(Error::DimensionMismatch {
            expected: coords.dim(),
            got: components.len(),
        });
    }
    VectorFieldSpec::build(FieldKind::Explicit(components), coords)
}

macro_rules! dispatch_dim {
    ($d:expr, $f:ident ( $($arg:expr),* )) => {
        match $d {
            1 => $f::<1>($($arg),*),
            2 => $f::<2>($($arg),*),
            3 => $f::<3>($($arg),*),
            4 => $f::<4>($($arg),*),
            5 => $f::<5>($($arg),*),
            6 => $f::<6>($($arg),*),
            7 => $f::<7>($($arg),*),
            8 => $f::<8>($($arg),*),
            9 => $f::<9>($($arg),*),
            d => Err($crate::error::Error::DimensionMismatch { expected: $crate::fields::vector::MAX_DIM, got: d }),
        }
    };
}
pub(crate) use dispatch_dim;

impl VectorFieldSpec {
    fn build(kind: FieldKind, coords: Coords) -> Result<Self> {
        if coords.dim() > MAX_DIM || coords.n == 0 {
            return Err(Error::DimensionMismatch {
                expected: MAX_DIM,
                got: coords.dim(),
            });
        }
        let tapes = match &kind {
            FieldKind::Hamiltonian(f) | FieldKind::Contact(f) => vec![Tape::compile(&f.expr)?],
            FieldKind::Explicit(cs) => cs.iter().map(|c| Tape::compile(&c.expr)).collect::<Result<_>>()?,
        };
        Ok(VectorFieldSpec {
            kind,
            coords,
            domain: None,
            tapes,
        })
    }

    pub fn with_domain(mut self, domain: CoordBox) -> Result<Self> {
        if domain.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: domain.dim(),
            });
        }
        self.domain = Some(domain);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.coords.dim()
    }

    /// Symbolic components of the field.
    pub fn components(&self) -> Result<Vec<Expr>> {
        let n = self.coords.n;
        match &self.kind {
            FieldKind::Explicit(cs) => Ok(cs.iter().map(|c| c.expr.clone()).collect()),
            FieldKind::Hamiltonian(f) => {
                let g = f.gradient()?;
                let mut out: Vec<Expr> = g[n..].to_vec();
                out.extend(g[..n].iter().map(|e| Expr::mul(Expr::c(-1.0), e.clone())));
                Ok(out)
            }
            FieldKind::Contact(f) => {
                let g = f.gradient()?;
                let fz = g[2 * n].clone();
                let mut out = Vec::with_capacity(2 * n + 1);
                for gy in &g[n..2 * n] {
                    out.push(Expr::mul(Expr::c(-1.0), gy.clone()));
                }
                for i in 0..n {
                    out.push(Expr::add(g[i].clone(), Expr::mul(Expr::var(n + i), fz.clone())));
                }
                let mut last = f.expr.clone();
                for i in 0..n {
                    last = Expr::sub(last, Expr::mul(Expr::var(n + i), g[n + i].clone()));
                }
                out.push(last);
                Ok(out)
            }
        }
    }

    pub(crate) fn rhs<const D: usize>(&self, p: &[f64; D], s: &mut Scratch<D>) -> [f64; D] {
        let n = self.coords.n;
        let mut out = [0.0; D];
        match &self.kind {
            FieldKind::Explicit(_) => {
                for (o, t) in out.iter_mut().zip(&self.tapes) {
                    *o = t.eval::<f64>(p, &mut s.real);
                }
            }
            FieldKind::Hamiltonian(_) => {
                let f: Dual<D> = self.tapes[0].eval(p, &mut s.dual);
                for i in 0..n {
                    out[i] = f.g[n + i];
                    out[n + i] = -f.g[i];
                }
            }
            FieldKind::Contact(_) => {
                let f: Dual<D> = self.tapes[0].eval(p, &mut s.dual);
                let fz = f.g[2 * n];
                let mut last = f.v;
                for i in 0..n {
                    out[i] = -f.g[n + i];
                    out[n + i] = f.g[i] + p[n + i] * fz;
                    last -= p[n + i] * f.g[n + i];
                }
                out[2 * n] = last;
            }
        }
        out
    }

    pub(crate) fn rhs_jac<const D: usize>(&self, p: &[f64; D], s: &mut Scratch<D>) -> ([f64; D], [[f64; D]; D]) {
        let n = self.coords.n;
        let mut x = [0.0; D];
        let mut dx = [[0.0; D]; D];
        match &self.kind {
            FieldKind::Explicit(_) => {
                for (i, t) in self.tapes.iter().enumerate() {
                    let c: Dual<D> = t.eval(p, &mut s.dual);
                    x[i] = c.v;
                    dx[i] = c.g;
                }
            }
            FieldKind::Hamiltonian(_) => {
                let f: Jet<D> = self.tapes[0].eval(p, &mut s.jet);
                for i in 0..n {
                    x[i] = f.g[n + i];
                    x[n + i] = -f.g[i];
                    for k in 0..D {
                        dx[i][k] = f.h[n + i][k];
                        dx[n + i][k] = -f.h[i][k];
                    }
                }
            }
            FieldKind::Contact(_) => {
                let f: Jet<D> = self.tapes[0].eval(p, &mut s.jet);
                let z = 2 * n;
                let fz = f.g[z];
                x[z] = f.v;
                dx[z] = f.g;
                for i in 0..n {
                    let y = p[n + i];
                    x[i] = -f.g[n + i];
                    x[n + i] = f.g[i] + y * fz;
                    x[z] -= y * f.g[n + i];
                    for k in 0..D {
                        dx[i][k] = -f.h[n + i][k];
                        dx[n + i][k] = f.h[i][k] + y * f.h[z][k];
                        dx[z][k] -= y * f.h[n + i][k];
                    }
                    dx[n + i][n + i] += fz;
                    dx[z][n + i] -= f.g[n + i];
                }
            }
        }
        (x, dx)
    }

    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        fn go<const D: usize>(v: &VectorFieldSpec, p: &[f64]) -> Result<Vec<f64>> {
            let a: [f64; D] = p.try_into().map_err(|_| Error::DimensionMismatch { expected: D, got: p.len() })?;
            Ok(v.rhs(&a, &mut Scratch::new()).to_vec())
        }
        self.check_point(p)?;
        dispatch_dim!(self.dim(), go(self, p))
    }

    pub fn jacobian(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        fn go<const D: usize>(v: &VectorFieldSpec, p: &[f64]) -> Result<DMatrix<f64>> {
            let a: [f64; D] = p.try_into().map_err(|_| Error::DimensionMismatch { expected: D, got: p.len() })?;
            let (_, dx) = v.rhs_jac(&a, &mut Scratch::new());
            Ok(DMatrix::from_fn(D, D, |i, k| dx[i][k]))
        }
        self.check_point(p)?;
        dispatch_dim!(self.dim(), go(self, p))
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::expr::parse_field;

    #[test]
    fn symbolic_and_compiled_components_agree() {
        let f = parse_field("bump(0.2, 2) * (z*z + x1*y1 - 0.3*y1)", Coords::heisenberg(1)).unwrap();
        let x = contact_field(&f, 1).unwrap();
        let comps = x.components().unwrap();
        let p = [0.4, -0.3, 0.5];
        let v = x.eval(&p).unwrap();
        let j = x.jacobian(&p).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            assert!((v[i] - comps[i].eval(&p)).abs() < 1e-12);
            for k in 0..3 {
                let mut q = p;
                q[k] += h;
                let up = x.eval(&q).unwrap()[i];
                q[k] -= 2.0 * h;
                let dn = x.eval(&q).unwrap()[i];
                assert!((j[(i, k)] - (up - dn) / (2.0 * h)).abs() < 1e-6, "{i} {k}");
            }
        }
    }

    #[test]
    fn wrong_context_is_rejected() {
        let f = parse_field("x1", Coords::heisenberg(1)).unwrap();
        assert!(hamiltonian_field(&f, 1).is_err());
        assert!(contact_field(&f, 2).is_err());
    }
}
