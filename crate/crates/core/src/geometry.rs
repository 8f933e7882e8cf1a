//! Closed-form structure of the Heisenberg group `Hₙ` and of the standard
//! symplectic space `ℝ²ⁿ`.
//!
//! `Hₙ` is identified with `ℝ²ⁿ⁺¹` in the coordinate order
//! `(x₁..xₙ, y₁..yₙ, z)`; every grid, flow and convolution in the crate uses
//! this layout. The product is the one of the upper-triangular matrices
//!
//! ```text
//! | 1  xᵀ  z |
//! | 0  I   y |
//! | 0  0   1 |
//! ```
//!
//! so `(x, y, z)·(x', y', z') = (x + x', y + y', z + z' + x·y')`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point `(x, y, z)` of `Hₙ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: f64,
}

/// An element `(a, b, c)` of the Lie algebra of `Hₙ`, in exponential coordinates
/// matched to [`GroupPoint`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieVector {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: f64,
}

/// Components of a tangent vector: length `2n + 1` on `Hₙ`, `2n` on `ℝ²ⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentVector(pub Vec<f64>);

impl TangentVector {
    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<f64>> for TangentVector {
    fn from(v: Vec<f64>) -> Self {
        TangentVector(v)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

impl GroupPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>, z: f64) -> Result<Self> {
        check_len(x.len(), y.len())?;
        if x.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(GroupPoint { x, y, z })
    }

    pub fn identity(n: usize) -> Self {
        GroupPoint {
            x: vec![0.0; n],
            y: vec![0.0; n],
            z: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Builds a point from flat coordinates `(x₁..xₙ, y₁..yₙ, z)`.
    pub fn from_coords(c: &[f64]) -> Result<Self> {
        if c.len() < 3 || c.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: 2 * (c.len() / 2).max(1) + 1,
                got: c.len(),
            });
        }
        let n = c.len() / 2;
        Ok(GroupPoint {
            x: c[..n].to_vec(),
            y: c[n..2 * n].to_vec(),
            z: c[2 * n],
        })
    }

    pub fn to_coords(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.n() + 1);
        out.extend_from_slice(&self.x);
        out.extend_from_slice(&self.y);
        out.push(self.z);
        out
    }

    pub fn mul(&self, other: &GroupPoint) -> Result<GroupPoint> {
        group_mul(self, other)
    }

    pub fn inverse(&self) -> GroupPoint {
        group_inv(self)
    }
}

impl LieVector {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: f64) -> Result<Self> {
        check_len(a.len(), b.len())?;
        Ok(LieVector { a, b, c })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn scale(&self, s: f64) -> LieVector {
        LieVector {
            a: self.a.iter().map(|v| v * s).collect(),
            b: self.b.iter().map(|v| v * s).collect(),
            c: self.c * s,
        }
    }

    pub fn to_coords(&self) -> Vec<f64> {
        let mut out = self.a.clone();
        out.extend_from_slice(&self.b);
        out.push(self.c);
        out
    }
}

/// Group product of two points of `Hₙ`.
pub fn group_mul(u: &GroupPoint, v: &GroupPoint) -> Result<GroupPoint> {
    check_len(u.n(), v.n())?;
    Ok(GroupPoint {
        x: u.x.iter().zip(&v.x).map(|(a, b)| a + b).collect(),
        y: u.y.iter().zip(&v.y).map(|(a, b)| a + b).collect(),
        z: u.z + v.z + dot(&u.x, &v.y),
    })
}

pub(crate) fn inv_coords(u: &[f64], out: &mut [f64]) {
    let n = u.len() / 2;
    let xy: f64 = (0..n).map(|i| u[i] * u[n + i]).sum();
    for i in 0..2 * n {
        out[i] = -u[i];
    }
    out[2 * n] = -u[2 * n] + xy;
}

pub fn group_inv(u: &GroupPoint) -> GroupPoint {
    GroupPoint {
        x: u.x.iter().map(|v| -v).collect(),
        y: u.y.iter().map(|v| -v).collect(),
        z: -u.z + dot(&u.x, &u.y),
    }
}

/// `exp(a, b, c) = (a, b, c + a·b/2)`; the series of the nilpotent matrix stops
/// after the quadratic term.
pub fn exp_map(v: &LieVector) -> GroupPoint {
    GroupPoint {
        x: v.a.clone(),
        y: v.b.clone(),
        z: v.c + dot(&v.a, &v.b) / 2.0,
    }
}

/// Inverse of [`exp_map`]; `exp` is a global diffeomorphism on `Hₙ`.
pub fn log_map(p: &GroupPoint) -> LieVector {
    LieVector {
        a: p.x.clone(),
        b: p.y.clone(),
        c: p.z - dot(&p.x, &p.y) / 2.0,
    }
}

/// The contact form `α₀ = dz − Σ yⁱ dxⁱ` evaluated on `v` at `p`.
pub fn alpha0(p: &GroupPoint, v: &TangentVector) -> Result<f64> {
    let n = p.n();
    check_len(2 * n + 1, v.dim())?;
    Ok(alpha0_coords(&p.y, &v.0))
}

pub(crate) fn alpha0_coords(y: &[f64], v: &[f64]) -> f64 {
    let n = y.len();
    v[2 * n] - dot(y, &v[..n])
}

/// `dα₀ = Σ dxⁱ∧dyⁱ`; independent of the base point.
pub fn d_alpha0(p: &GroupPoint, v: &TangentVector, w: &TangentVector) -> Result<f64> {
    let n = p.n();
    check_len(2 * n + 1, v.dim())?;
    check_len(2 * n + 1, w.dim())?;
    Ok(symplectic_pairing(n, &v.0, &w.0))
}

fn symplectic_pairing(n: usize, v: &[f64], w: &[f64]) -> f64 {
    (0..n).map(|i| v[i] * w[n + i] - v[n + i] * w[i]).sum()
}

/// Reeb field of `α₀`: the unit vector along `z`.
pub fn reeb_field(p: &GroupPoint) -> TangentVector {
    let mut v = vec![0.0; 2 * p.n() + 1];
    v[2 * p.n()] = 1.0;
    TangentVector(v)
}

/// `δ_t(x, y, z) = (eᵗx, eᵗy, e²ᵗz)`, the flow of `(x, y, 2z)`.
pub fn dilation(t: f64, p: &GroupPoint) -> GroupPoint {
    let s = t.exp();
    GroupPoint {
        x: p.x.iter().map(|v| v * s).collect(),
        y: p.y.iter().map(|v| v * s).collect(),
        z: p.z * (2.0 * t).exp(),
    }
}

/// The standard symplectic form `ω₀ = Σ dxⁱ∧dyⁱ` on `ℝ²ⁿ`.
pub fn omega0(u: &TangentVector, v: &TangentVector) -> Result<f64> {
    if !u.dim().is_multiple_of(2) || u.dim() == 0 {
        return Err(Error::DimensionMismatch {
            expected: u.dim() + 1,
            got: u.dim(),
        });
    }
    check_len(u.dim(), v.dim())?;
    Ok(symplectic_pairing(u.dim() / 2, &u.0, &v.0))
}

/// Matrix `Ω` with `ω₀(u, v) = uᵀ Ω v`.
pub fn omega_matrix(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, n + i)] = 1.0;
        m[(n + i, i)] = -1.0;
    }
    m
}

/// Bordered matrix `[[dα₀, α₀ᵀ], [α₀, 0]]` at `p`; invertible exactly when
/// `α₀ ∧ (dα₀)ⁿ ≠ 0` at `p`.
pub fn contact_bordered_matrix(p: &GroupPoint) -> DMatrix<f64> {
    let n = p.n();
    let d = 2 * n + 1;
    let mut m = DMatrix::zeros(d + 1, d + 1);
    for i in 0..n {
        m[(i, n + i)] = 1.0;
        m[(n + i, i)] = -1.0;
    }
    for i in 0..n {
        m[(i, d)] = -p.y[i];
        m[(d, i)] = -p.y[i];
    }
    m[(2 * n, d)] = 1.0;
    m[(d, 2 * n)] = 1.0;
    m
}

/// Differential of the left translation `p ↦ g·p`.
pub fn left_translation_differential(g: &GroupPoint) -> DMatrix<f64> {
    let n = g.n();
    let mut m = DMatrix::identity(2 * n + 1, 2 * n + 1);
    for i in 0..n {
        m[(2 * n, n + i)] = g.x[i];
    }
    m
}

/// Differential of the right translation `p ↦ p·g`.
pub fn right_translation_differential(g: &GroupPoint) -> DMatrix<f64> {
    let n = g.n();
    let mut m = DMatrix::identity(2 * n + 1, 2 * n + 1);
    for i in 0..n {
        m[(2 * n, i)] = g.y[i];
    }
    m
}

/// Axis-aligned closed box `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl CoordBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_len(lo.len(), hi.len())?;
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(Error::Precondition(format!(
                "box corners not ordered: {lo:?} / {hi:?}"
            )));
        }
        Ok(CoordBox { lo, hi })
    }

    /// Box `[-h, h]` per axis.
    pub fn centered(half: &[f64]) -> Self {
        CoordBox {
            lo: half.iter().map(|h| -h).collect(),
            hi: half.to_vec(),
        }
    }

    pub fn cube(dim: usize, half: f64) -> Self {
        CoordBox::centered(&vec![half; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.contains_with_slack(p, 0.0)
    }

    pub fn contains_with_slack(&self, p: &[f64], slack: f64) -> bool {
        p.len() == self.dim()
            && p
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (a, b))| *v >= a - slack && *v <= b + slack)
    }

    pub fn contains_box(&self, other: &CoordBox, slack: f64) -> bool {
        self.contains_with_slack(&other.lo, slack) && self.contains_with_slack(&other.hi, slack)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    /// Euclidean distance from the origin to the farthest corner.
    pub fn circumradius(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| a.abs().max(b.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Euclidean distance from the origin to the nearest face (0 if the origin
    /// is outside).
    pub fn inradius(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (-a).min(*b))
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }

    pub fn corners(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|i| {
                        if mask >> i & 1 == 1 {
                            self.hi[i]
                        } else {
                            self.lo[i]
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn minkowski_sum(&self, other: &CoordBox) -> CoordBox {
        CoordBox {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a + b).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn negated(&self) -> CoordBox {
        CoordBox {
            lo: self.hi.iter().map(|v| -v).collect(),
            hi: self.lo.iter().map(|v| -v).collect(),
        }
    }
}

fn interval_product(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let c = [a.0 * b.0, a.0 * b.1, a.1 * b.0, a.1 * b.1];
    (
        c.iter().copied().fold(f64::INFINITY, f64::min),
        c.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    )
}

/// Bounding box of the product set `A·B ⊆ Hₙ` for boxes `A`, `B`. Exact for
/// boxes: each twist term `xᵢ·y'ᵢ` is bilinear in independent coordinates.
pub fn heisenberg_product_box(a: &CoordBox, b: &CoordBox) -> CoordBox {
    let d = a.dim();
    let n = d / 2;
    let mut out = a.minkowski_sum(b);
    for i in 0..n {
        let (lo, hi) = interval_product((a.lo[i], a.hi[i]), (b.lo[n + i], b.hi[n + i]));
        out.lo[2 * n] += lo;
        out.hi[2 * n] += hi;
    }
    out
}

/// Bounding box of `{p⁻¹ : p ∈ A}`.
pub fn heisenberg_inverse_box(a: &CoordBox) -> CoordBox {
    let d = a.dim();
    let n = d / 2;
    let mut out = a.negated();
    out.lo[2 * n] = -a.hi[2 * n];
    out.hi[2 * n] = -a.lo[2 * n];
    for i in 0..n {
        let (lo, hi) = interval_product((a.lo[i], a.hi[i]), (a.lo[n + i], a.hi[n + i]));
        out.lo[2 * n] += lo;
        out.hi[2 * n] += hi;
    }
    out
}

/// Bounding box of `exp[W]` for a coordinate box `W` in the Lie algebra.
pub fn exp_box(w: &CoordBox) -> CoordBox {
    let n = w.dim() / 2;
    let mut out = w.clone();
    for i in 0..n {
        let (lo, hi) = interval_product((w.lo[i], w.hi[i]), (w.lo[n + i], w.hi[n + i]));
        out.lo[2 * n] += lo / 2.0;
        out.hi[2 * n] += hi / 2.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(x: f64, y: f64, z: f64) -> GroupPoint {
        GroupPoint::new(vec![x], vec![y], z).unwrap()
    }

    // 3×3 upper-triangular matrix of an H₁ element.
    fn matrix(p: &GroupPoint) -> [[f64; 3]; 3] {
        [[1.0, p.x[0], p.z], [0.0, 1.0, p.y[0]], [0.0, 0.0, 1.0]]
    }

    fn matmul(a: [[f64; 3]; 3], b: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut c = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    }

    #[test]
    fn product_matches_matrices() {
        let u = gp(1.0, 0.0, 0.0);
        let v = gp(0.0, 1.0, 0.0);
        assert_eq!(group_mul(&u, &v).unwrap(), gp(1.0, 1.0, 1.0));
        assert_eq!(group_mul(&v, &u).unwrap(), gp(1.0, 1.0, 0.0));
        let m = matmul(matrix(&u), matrix(&v));
        assert_eq!(m[0][2], 1.0);

        let a = gp(0.3, -1.2, 2.0);
        let b = gp(-0.7, 0.4, 1.5);
        let m = matmul(matrix(&a), matrix(&b));
        let p = group_mul(&a, &b).unwrap();
        assert!((m[0][1] - p.x[0]).abs() < 1e-15);
        assert!((m[1][2] - p.y[0]).abs() < 1e-15);
        assert!((m[0][2] - p.z).abs() < 1e-15);
        assert_eq!(group_mul(&a, &GroupPoint::identity(1)).unwrap(), a);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let u = GroupPoint::identity(1);
        let v = GroupPoint::identity(2);
        assert!(matches!(
            group_mul(&u, &v),
            Err(Error::DimensionMismatch { .. })
        ));
        let p = GroupPoint::identity(1);
        assert!(alpha0(&p, &TangentVector(vec![1.0, 0.0])).is_err());
    }

    #[test]
    fn inverse() {
        assert_eq!(group_inv(&gp(1.0, 2.0, 3.0)), gp(-1.0, -2.0, -1.0));
        assert_eq!(group_inv(&GroupPoint::identity(2)).z, 0.0);
        let u = gp(0.4, -2.5, 1.25);
        assert_eq!(group_inv(&group_inv(&u)), u);
        let e = group_mul(&u, &group_inv(&u)).unwrap();
        assert!(e.to_coords().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn exponential() {
        let v = LieVector::new(vec![1.0], vec![1.0], 0.0).unwrap();
        assert_eq!(exp_map(&v), gp(1.0, 1.0, 0.5));
        let c = LieVector::new(vec![0.0], vec![0.0], 2.5).unwrap();
        assert_eq!(exp_map(&c), gp(0.0, 0.0, 2.5));
        let w = LieVector::new(vec![0.3, -1.0], vec![2.0, 0.5], -0.7).unwrap();
        let e = group_mul(&exp_map(&w), &exp_map(&w.scale(-1.0))).unwrap();
        assert!(e.to_coords().iter().all(|v| v.abs() < 1e-15));
        assert_eq!(log_map(&exp_map(&w)), w);
    }

    #[test]
    fn contact_form_values() {
        let p = gp(0.0, 2.0, 0.0);
        assert_eq!(alpha0(&p, &TangentVector(vec![1.0, 0.0, 0.0])).unwrap(), -2.0);
        let q = gp(5.0, -3.0, 1.0);
        assert_eq!(alpha0(&q, &reeb_field(&q)).unwrap(), 1.0);
        let flat = gp(1.0, 0.0, 7.0);
        assert_eq!(alpha0(&flat, &TangentVector(vec![3.0, 4.0, 0.25])).unwrap(), 0.25);

        let ex = TangentVector(vec![1.0, 0.0, 0.0]);
        let ey = TangentVector(vec![0.0, 1.0, 0.0]);
        let ez = TangentVector(vec![0.0, 0.0, 1.0]);
        assert_eq!(d_alpha0(&q, &ex, &ey).unwrap(), 1.0);
        assert_eq!(d_alpha0(&q, &ex, &ex).unwrap(), 0.0);
        let w = TangentVector(vec![0.3, -0.2, 5.0]);
        assert_eq!(d_alpha0(&q, &ez, &w).unwrap(), 0.0);
    }

    #[test]
    fn dilation_values() {
        let p = gp(1.0, 1.0, 1.0);
        let d = dilation(2f64.ln(), &p);
        assert!((d.x[0] - 2.0).abs() < 1e-15);
        assert!((d.y[0] - 2.0).abs() < 1e-15);
        assert!((d.z - 4.0).abs() < 1e-14);
        assert_eq!(dilation(0.0, &p), p);
        let a = dilation(0.3, &dilation(-1.1, &p));
        let b = dilation(-0.8, &p);
        assert!((a.z - b.z).abs() < 1e-15 && (a.x[0] - b.x[0]).abs() < 1e-15);
    }

    #[test]
    fn symplectic_form() {
        let u = TangentVector(vec![1.0, 0.0]);
        let v = TangentVector(vec![0.0, 1.0]);
        assert_eq!(omega0(&u, &v).unwrap(), 1.0);
        assert_eq!(omega0(&u, &u).unwrap(), 0.0);
        for n in 1..=4 {
            let om = omega_matrix(n);
            let sq = &om * &om;
            assert_eq!(sq, -DMatrix::identity(2 * n, 2 * n));
        }
        assert!(omega0(&TangentVector(vec![1.0; 3]), &TangentVector(vec![1.0; 3])).is_err());
    }

    #[test]
    fn product_box_bounds_products() {
        let a = CoordBox::new(vec![-0.5, 0.2, -1.0], vec![0.3, 0.9, 0.5]).unwrap();
        let b = CoordBox::new(vec![-1.0, -0.4, 0.0], vec![0.1, 0.6, 2.0]).unwrap();
        let pb = heisenberg_product_box(&a, &b);
        for ca in a.corners() {
            for cb in b.corners() {
                let out = group_mul(&GroupPoint::from_coords(&ca).unwrap(), &GroupPoint::from_coords(&cb).unwrap())
                    .unwrap()
                    .to_coords();
                assert!(pb.contains_with_slack(&out, 1e-12));
            }
        }
        let ib = heisenberg_inverse_box(&a);
        for ca in a.corners() {
            let mut out = [0.0; 3];
            inv_coords(&ca, &mut out);
            assert!(ib.contains_with_slack(&out, 1e-12));
        }
    }
}
