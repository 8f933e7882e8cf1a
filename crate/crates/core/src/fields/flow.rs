use std::sync::Arc;

use nalgebra::DMatrix;

use super::vector::{dispatch_dim, Scratch, VectorFieldSpec};
use crate::error::{Error, Result};

pub const DEFAULT_STEP: f64 = 1e-2;

/// A diffeomorphism of `ℝᵈ` with inverse and Jacobians.
pub trait Diffeo: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, p: &[f64]) -> Result<Vec<f64>>;
    fn apply_inverse(&self, p: &[f64]) -> Result<Vec<f64>>;
    /// `(γ(p), Dγ(p))`
    fn apply_with_jacobian(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)>;
    /// `(γ⁻¹(p), Dγ⁻¹(p))`
    fn inverse_with_jacobian(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)>;

    fn jacobian(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.apply_with_jacobian(p)?.1)
    }

    fn inverse_jacobian(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.inverse_with_jacobian(p)?.1)
    }
}

/// Time-`t` flow of a vector field, integrated with classical RK4 at a fixed
/// step. The inverse is the flow for time `−t`; Jacobians come from the
/// variational equation `dJ/dt = DX·J` integrated alongside.
#[derive(Clone, Debug)]
pub struct FlowMap {
    pub field: Arc<VectorFieldSpec>,
    pub time: f64,
    pub step: f64,
}

impl FlowMap {
    pub fn new(field: VectorFieldSpec, time: f64, step: f64) -> Result<Self> {
        Self::from_shared(Arc::new(field), time, step)
    }

    pub fn from_shared(field: Arc<VectorFieldSpec>, time: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite() && time.is_finite()) {
            return Err(Error::Precondition(format!(
                "flow needs a positive step and finite time, got step {step}, time {time}"
            )));
        }
        Ok(FlowMap { field, time, step })
    }

    pub fn inverse(&self) -> FlowMap {
        FlowMap {
            field: self.field.clone(),
            time: -self.time,
            step: self.step,
        }
    }

    pub fn steps(&self) -> usize {
        if self.time == 0.0 {
            0
        } else {
            ((self.time.abs() / self.step) - 1e-9).ceil().max(1.0) as usize
        }
    }

    fn fixed(&self, p: &[f64]) -> bool {
        self.time == 0.0 || self.field.domain.as_ref().is_some_and(|d| !d.contains(p))
    }

    fn integrate(&self, p: &[f64], sign: f64) -> Result<Vec<f64>> {
        self.check(p)?;
        if self.fixed(p) {
            return Ok(p.to_vec());
        }
        dispatch_dim!(self.field.dim(), integrate_point(self, p, sign))
    }

    fn integrate_jac(&self, p: &[f64], sign: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
        self.check(p)?;
        let d = self.field.dim();
        if self.fixed(p) {
            return Ok((p.to_vec(), DMatrix::identity(d, d)));
        }
        dispatch_dim!(d, integrate_variational(self, p, sign))
    }

    fn check(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.field.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.field.dim(),
                got: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("flow start point".into()));
        }
        Ok(())
    }

    fn check_state(&self, x: &[f64], k: usize, dt: f64) -> Result<()> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("trajectory at t = {}", k as f64 * dt)));
        }
        if let Some(d) = &self.field.domain {
            if !d.contains_with_slack(x, 1e-12) {
                return Err(Error::TrajectoryEscape { t: k as f64 * dt });
            }
        }
        Ok(())
    }
}

fn axpy<const D: usize>(x: &[f64; D], a: f64, k: &[f64; D]) -> [f64; D] {
    let mut out = *x;
    for i in 0..D {
        out[i] += a * k[i];
    }
    out
}

fn integrate_point<const D: usize>(map: &FlowMap, p: &[f64], sign: f64) -> Result<Vec<f64>> {
    let steps = map.steps();
    let dt = sign * map.time / steps as f64;
    let field = &*map.field;
    let mut s = Scratch::<D>::new();
    let mut x: [f64; D] = p.try_into().expect("checked length");
    for k in 0..steps {
        let k1 = field.rhs(&x, &mut s);
        let k2 = field.rhs(&axpy(&x, dt / 2.0, &k1), &mut s);
        let k3 = field.rhs(&axpy(&x, dt / 2.0, &k2), &mut s);
        let k4 = field.rhs(&axpy(&x, dt, &k3), &mut s);
        for i in 0..D {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        map.check_state(&x, k + 1, dt.abs())?;
    }
    Ok(x.to_vec())
}

fn mat_mul<const D: usize>(a: &[[f64; D]; D], b: &[[f64; D]; D]) -> [[f64; D]; D] {
    let mut out = [[0.0; D]; D];
    for i in 0..D {
        for k in 0..D {
            let aik = a[i][k];
            if aik != 0.0 {
                for j in 0..D {
                    out[i][j] += aik * b[k][j];
                }
            }
        }
    }
    out
}

fn mat_axpy<const D: usize>(x: &[[f64; D]; D], a: f64, k: &[[f64; D]; D]) -> [[f64; D]; D] {
    let mut out = *x;
    for i in 0..D {
        for j in 0..D {
            out[i][j] += a * k[i][j];
        }
    }
    out
}

fn integrate_variational<const D: usize>(map: &FlowMap, p: &[f64], sign: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let steps = map.steps();
    let dt = sign * map.time / steps as f64;
    let field = &*map.field;
    let mut s = Scratch::<D>::new();
    let mut x: [f64; D] = p.try_into().expect("checked length");
    let mut j = [[0.0; D]; D];
    for (i, row) in j.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let stage = |x: &[f64; D], j: &[[f64; D]; D], s: &mut Scratch<D>| {
        let (v, dv) = field.rhs_jac(x, s);
        (v, mat_mul(&dv, j))
    };
    for k in 0..steps {
        let (k1, l1) = stage(&x, &j, &mut s);
        let (k2, l2) = stage(&axpy(&x, dt / 2.0, &k1), &mat_axpy(&j, dt / 2.0, &l1), &mut s);
        let (k3, l3) = stage(&axpy(&x, dt / 2.0, &k2), &mat_axpy(&j, dt / 2.0, &l2), &mut s);
        let (k4, l4) = stage(&axpy(&x, dt, &k3), &mat_axpy(&j, dt, &l3), &mut s);
        for i in 0..D {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            for c in 0..D {
                j[i][c] += dt / 6.0 * (l1[i][c] + 2.0 * l2[i][c] + 2.0 * l3[i][c] + l4[i][c]);
            }
        }
        map.check_state(&x, k + 1, dt.abs())?;
    }
    if j.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("flow Jacobian".into()));
    }
    Ok((x.to_vec(), DMatrix::from_fn(D, D, |r, c| j[r][c])))
}

impl Diffeo for FlowMap {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.integrate(p, 1.0)
    }

    fn apply_inverse(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.integrate(p, -1.0)
    }

    fn apply_with_jacobian(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        self.integrate_jac(p, 1.0)
    }

    fn inverse_with_jacobian(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        self.integrate_jac(p, -1.0)
    }
}

/// Point evaluation of a flow map.
pub fn flow(map: &FlowMap, p: &[f64]) -> Result<Vec<f64>> {
    map.apply(p)
}

/// Jacobian of a flow map at `p`.
pub fn flow_jacobian(map: &FlowMap, p: &[f64]) -> Result<DMatrix<f64>> {
    map.jacobian(p)
}

#[derive(Clone, Copy, Debug)]
pub struct IdentityMap {
    pub dim: usize,
}

impl Diffeo for IdentityMap {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(p.to_vec())
    }
    fn apply_inverse(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(p.to_vec())
    }
    fn apply_with_jacobian(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        Ok((p.to_vec(), DMatrix::identity(self.dim, self.dim)))
    }
    fn inverse_with_jacobian(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        self.apply_with_jacobian(p)
    }
}

/// `outer ∘ inner`: applies `inner` first.
#[derive(Clone)]
pub struct Composition {
    pub outer: Arc<dyn Diffeo>,
    pub inner: Arc<dyn Diffeo>,
}

impl Composition {
    pub fn new(outer: Arc<dyn Diffeo>, inner: Arc<dyn Diffeo>) -> Result<Self> {
        if outer.dim() != inner.dim() {
            return Err(Error::DimensionMismatch {
                expected: outer.dim(),
                got: inner.dim(),
            });
        }
        Ok(Composition { outer, inner })
    }
}

impl Diffeo for Composition {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.outer.apply(&self.inner.apply(p)?)
    }
    fn apply_inverse(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.inner.apply_inverse(&self.outer.apply_inverse(p)?)
    }
    fn apply_with_jacobian(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let (q, ji) = self.inner.apply_with_jacobian(p)?;
        let (r, jo) = self.outer.apply_with_jacobian(&q)?;
        Ok((r, jo * ji))
    }
    fn inverse_with_jacobian(&self, p: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let (q, jo) = self.outer.inverse_with_jacobian(p)?;
        let (r, ji) = self.inner.inverse_with_jacobian(&q)?;
        Ok((r, ji * jo))
    }
}
