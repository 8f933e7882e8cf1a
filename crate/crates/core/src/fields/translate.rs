//! Compactly supported flows that act as translations on a chosen set.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::expr::{Coords, Expr, ScalarFieldSpec};
use super::flow::{Diffeo, FlowMap};
use super::vector::{contact_field, hamiltonian_field};
use crate::error::{Error, Result};
use crate::geometry::{
    alpha0_coords, exp_box, heisenberg_product_box, log_map, omega_matrix, CoordBox, GroupPoint,
};

fn pad(b: &CoordBox, factor: f64) -> CoordBox {
    let lo = b.lo.iter().zip(&b.hi).map(|(l, h)| l - factor * (h - l) / 2.0).collect();
    let hi = b.lo.iter().zip(&b.hi).map(|(l, h)| h + factor * (h - l) / 2.0).collect();
    CoordBox { lo, hi }
}

/// Time-one flow of `X_{fh}` with `X_f ≡ x` and `h = bump(3r, r_outer)`.
///
/// On `B(0, r)` the map is `y ↦ y + x`; outside `B(0, r_outer)` it is the
/// identity.
pub fn translation_symplecto(x: &[f64], r: f64, r_outer: f64, step: f64) -> Result<FlowMap> {
    if x.is_empty() || !x.len().is_multiple_of(2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: x.len(),
        });
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(r > 0.0) || norm >= 2.0 * r {
        return Err(Error::Precondition(format!(
            "translation needs |x| < 2r, got |x| = {norm}, r = {r}"
        )));
    }
    if 3.0 * r >= r_outer {
        return Err(Error::Precondition(format!(
            "translation needs 3r < R_outer, got r = {r}, R_outer = {r_outer}"
        )));
    }
    let n = x.len() / 2;
    // f = Σ x_xᵢ·yᵢ − x_yᵢ·xᵢ has X_f = x
    let mut f = Expr::c(0.0);
    for i in 0..n {
        f = Expr::add(f, Expr::mul(Expr::c(x[i]), Expr::var(n + i)));
        f = Expr::sub(f, Expr::mul(Expr::c(x[n + i]), Expr::var(i)));
    }
    let fh = Expr::mul(Expr::bump(3.0 * r, r_outer), f);
    let spec = ScalarFieldSpec::new(fh, Coords::symplectic(n))?;
    let domain = pad(&CoordBox::cube(2 * n, r_outer), 0.1);
    FlowMap::new(hamiltonian_field(&spec, n)?.with_domain(domain)?, 1.0, step)
}

/// Sets configuring the contact translations on `Hₙ`.
///
/// `V` is the cube of half-width `v_half`, `W` the Lie-algebra box with
/// half-widths `w_half`, and the generator is cut off outside the box with
/// half-widths `outer_half`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactBoxes {
    pub n: usize,
    pub v_half: f64,
    pub w_half: Vec<f64>,
    pub outer_half: Vec<f64>,
}

/// Radii of the cutoff derived from validated [`ContactBoxes`].
#[derive(Clone, Debug, PartialEq)]
pub struct ContactPlan {
    pub v: CoordBox,
    pub w: CoordBox,
    pub plateau: CoordBox,
    pub r_inner: f64,
    pub r_outer: f64,
}

/// Box containing `log[b]`.
fn log_box(b: &CoordBox) -> CoordBox {
    let n = b.dim() / 2;
    let (mut lo_xy, mut hi_xy) = (0.0, 0.0);
    for i in 0..n {
        let c = [
            b.lo[i] * b.lo[n + i],
            b.lo[i] * b.hi[n + i],
            b.hi[i] * b.lo[n + i],
            b.hi[i] * b.hi[n + i],
        ];
        lo_xy += c.iter().copied().fold(f64::INFINITY, f64::min);
        hi_xy += c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    let mut out = b.clone();
    out.lo[2 * n] = b.lo[2 * n] - hi_xy / 2.0;
    out.hi[2 * n] = b.hi[2 * n] - lo_xy / 2.0;
    out
}

impl ContactBoxes {
    pub fn new(n: usize, v_half: f64, w_half: Vec<f64>, outer_half: Vec<f64>) -> Self {
        ContactBoxes {
            n,
            v_half,
            w_half,
            outer_half,
        }
    }

    /// Checks `0 ∈ V ⊆ VV ⊆ exp[W]` and that the cutoff plateau containing
    /// `V·exp[W]` fits strictly inside the outer box.
    pub fn validate(&self) -> Result<ContactPlan> {
        let d = 2 * self.n + 1;
        if self.w_half.len() != d || self.outer_half.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.w_half.len().min(self.outer_half.len()),
            });
        }
        if !(self.v_half > 0.0) || self.w_half.iter().chain(&self.outer_half).any(|v| !(*v > 0.0)) {
            return Err(Error::InclusionViolated("0 ∈ V requires positive half-widths".into()));
        }
        let v = CoordBox::cube(d, self.v_half);
        let w = CoordBox::centered(&self.w_half);
        let vv = heisenberg_product_box(&v, &v);
        let log_vv = log_box(&vv);
        if !w.contains_box(&log_vv, 0.0) {
            return Err(Error::InclusionViolated(format!(
                "VV is not inside exp[W]: log[VV] ⊆ {:?}..{:?}",
                log_vv.lo, log_vv.hi
            )));
        }
        let plateau = heisenberg_product_box(&v, &exp_box(&w));
        let outer = CoordBox::centered(&self.outer_half);
        let r_inner = plateau.circumradius();
        let r_outer = outer.inradius();
        if r_inner >= r_outer {
            return Err(Error::InclusionViolated(format!(
                "plateau V·exp[W] (radius {r_inner}) does not fit inside the outer box (inradius {r_outer})"
            )));
        }
        Ok(ContactPlan {
            v,
            w,
            plateau,
            r_inner,
            r_outer,
        })
    }
}

/// Time-one flow of the contact field of `h·α₀(X_v)` with `v = log x`, which
/// is right multiplication by `x` on `V` and the identity outside the outer
/// box.
pub fn translation_contacto(x: &GroupPoint, boxes: &ContactBoxes, step: f64) -> Result<FlowMap> {
    if x.n() != boxes.n {
        return Err(Error::DimensionMismatch {
            expected: boxes.n,
            got: x.n(),
        });
    }
    let plan = boxes.validate()?;
    let v = log_map(x);
    let vc = v.to_coords();
    if !plan.w.contains_with_slack(&vc, 1e-12) {
        return Err(Error::InclusionViolated(format!("log x = {vc:?} is not in W")));
    }
    let n = boxes.n;
    // α₀(X_v) = c + b·x − a·y for the left-invariant field of v = (a, b, c)
    let mut f = Expr::c(v.c);
    for i in 0..n {
        f = Expr::add(f, Expr::mul(Expr::c(v.b[i]), Expr::var(i)));
        f = Expr::sub(f, Expr::mul(Expr::c(v.a[i]), Expr::var(n + i)));
    }
    let fh = Expr::mul(Expr::bump(plan.r_inner, plan.r_outer), f);
    let spec = ScalarFieldSpec::new(fh, Coords::heisenberg(n))?;
    let domain = pad(&CoordBox::cube(2 * n + 1, plan.r_outer), 0.1);
    FlowMap::new(contact_field(&spec, n)?.with_domain(domain)?, 1.0, step)
}

/// Contact field of `bump(r1, r2)·(2z − Σ xᵢyᵢ)`, whose time-`t` flow is the
/// dilation `δ_t` on `|p| ≤ r1` and the identity on `|p| ≥ r2`.
pub fn truncated_dilation(n: usize, r1: f64, r2: f64, time: f64, step: f64) -> Result<FlowMap> {
    if !(0.0 <= r1 && r1 < r2) {
        return Err(Error::Precondition(format!("need 0 <= r1 < r2, got ({r1}, {r2})")));
    }
    let mut f = Expr::mul(Expr::c(2.0), Expr::var(2 * n));
    for i in 0..n {
        f = Expr::sub(f, Expr::mul(Expr::var(i), Expr::var(n + i)));
    }
    let spec = ScalarFieldSpec::new(Expr::mul(Expr::bump(r1, r2), f), Coords::heisenberg(n))?;
    let domain = pad(&CoordBox::cube(2 * n + 1, r2), 0.1);
    FlowMap::new(contact_field(&spec, n)?.with_domain(domain)?, time, step)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructureKind {
    Symplectic,
    Contact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCheck {
    pub point: Vec<f64>,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub kind: StructureKind,
    pub tol: f64,
    pub max_residual: f64,
    pub points: Vec<PointCheck>,
    pub passed: bool,
}

/// Symplectic residual `‖JᵀΩJ − Ω‖∞`.
pub fn symplectic_residual(j: &DMatrix<f64>) -> f64 {
    let omega = omega_matrix(j.nrows() / 2);
    (j.transpose() * &omega * j - omega).abs().max()
}

/// Largest `|α₀(φ(p), J·e)| / ‖J·e‖` over a basis `e` of `ker α₀` at `p`.
pub fn contact_residual(p: &[f64], image: &[f64], j: &DMatrix<f64>) -> f64 {
    let d = p.len();
    let n = d / 2;
    let y_img = &image[n..2 * n];
    let mut worst: f64 = 0.0;
    for k in 0..2 * n {
        let mut e = nalgebra::DVector::zeros(d);
        e[k] = 1.0;
        if k < n {
            e[2 * n] = p[n + k];
        }
        let je = j * e;
        let norm = je.norm();
        let val = alpha0_coords(y_img, je.as_slice());
        worst = worst.max(val.abs() / norm.max(f64::MIN_POSITIVE));
    }
    worst
}

/// Checks that `map` preserves `ω₀` or `ker α₀` at each point.
pub fn check_structure(map: &dyn Diffeo, kind: StructureKind, points: &[Vec<f64>], tol: f64) -> Result<StructureReport> {
    let mut checks = Vec::with_capacity(points.len());
    for p in points {
        let (q, j) = map.apply_with_jacobian(p)?;
        let residual = match kind {
            StructureKind::Symplectic => symplectic_residual(&j),
            StructureKind::Contact => contact_residual(p, &q, &j),
        };
        checks.push(PointCheck {
            point: p.clone(),
            residual,
            passed: residual <= tol,
        });
    }
    let max_residual = checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    Ok(StructureReport {
        kind,
        tol,
        max_residual,
        passed: checks.iter().all(|c| c.passed),
        points: checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{exp_map, group_mul, LieVector};

    fn boxes() -> ContactBoxes {
        ContactBoxes::new(1, 0.5, vec![1.2, 1.2, 2.5], vec![7.0, 7.0, 7.0])
    }

    #[test]
    fn symplectic_translation_on_inner_ball() {
        let map = translation_symplecto(&[0.5, 0.5], 1.0, 4.0, 1e-2).unwrap();
        for y in [[0.0, 0.0], [0.6, -0.7], [-0.9, 0.1]] {
            let q = map.apply(&y).unwrap();
            assert!((q[0] - y[0] - 0.5).abs() < 1e-12 && (q[1] - y[1] - 0.5).abs() < 1e-12);
        }
        assert_eq!(map.apply(&[4.1, 0.0]).unwrap(), vec![4.1, 0.0]);
        assert!(translation_symplecto(&[2.0, 0.0], 1.0, 4.0, 1e-2).is_err());
        assert!(translation_symplecto(&[0.1, 0.0], 1.0, 3.0, 1e-2).is_err());
    }

    #[test]
    fn contact_translation_is_right_multiplication() {
        let x = exp_map(&LieVector::new(vec![0.3], vec![-0.2], 0.4).unwrap());
        let map = translation_contacto(&x, &boxes(), 1e-2).unwrap();
        for y in [[0.0, 0.0, 0.0], [0.4, -0.3, 0.2], [-0.5, 0.5, -0.5]] {
            let q = map.apply(&y).unwrap();
            let e = group_mul(&GroupPoint::from_coords(&y).unwrap(), &x).unwrap().to_coords();
            for i in 0..3 {
                assert!((q[i] - e[i]).abs() < 1e-10, "{q:?} {e:?}");
            }
        }
        let report = check_structure(&map, StructureKind::Contact, &[vec![0.2, 0.1, -0.3], vec![3.0, -2.5, 2.0]], 1e-6).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn inclusion_violations_are_reported() {
        let mut b = boxes();
        b.w_half = vec![0.8, 1.2, 2.5];
        assert!(matches!(b.validate(), Err(Error::InclusionViolated(_))));
        let mut b = boxes();
        b.outer_half = vec![7.0, 7.0, 3.0];
        assert!(matches!(b.validate(), Err(Error::InclusionViolated(_))));
        let far = exp_map(&LieVector::new(vec![2.0], vec![0.0], 0.0).unwrap());
        assert!(matches!(translation_contacto(&far, &boxes(), 1e-2), Err(Error::InclusionViolated(_))));
    }
}
