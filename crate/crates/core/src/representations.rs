//! The representations `Π^θ(γ)f = f∘γ⁻¹ · (dγ_*μ/dμ)^{1/2+iθ}` of
//! diffeomorphism groups on `L²(M, μ)`, their matrix coefficients, and the
//! witness searches showing those coefficients do not all vanish.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{conv_euclid, conv_heis, witness_threshold};
use crate::error::{Error, Result};
use crate::fields::{translation_contacto, translation_symplecto, truncated_dilation, ContactBoxes, Diffeo, ScalarFieldSpec};
use crate::geometry::{dilation, log_map, CoordBox, GroupPoint};
use crate::report::WitnessReport;
use crate::sampled::{
    integrate_over_box, l2_norm, star_euclid, star_heis, trapezoid_weights, GridSpec, IndexBox, SampledFunction,
};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RepresentationParams {
    pub theta: f64,
    /// Density of `μ` against Lebesgue measure; `None` means 1.
    pub density: Option<ScalarFieldSpec>,
}

impl RepresentationParams {
    pub fn new(theta: f64) -> Self {
        RepresentationParams { theta, density: None }
    }

    pub fn with_density(theta: f64, density: ScalarFieldSpec) -> Self {
        RepresentationParams {
            theta,
            density: Some(density),
        }
    }

    pub fn density_at(&self, p: &[f64]) -> Result<f64> {
        match &self.density {
            None => Ok(1.0),
            Some(d) => {
                let v = d.eval(p);
                if v > 0.0 && v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonPositiveRatio {
                        value: v,
                        location: p.to_vec(),
                    })
                }
            }
        }
    }
}

/// `w^{1/2+iθ} = exp((1/2 + iθ)·ln w)` for `w > 0`.
pub fn unitary_factor(w: f64, theta: f64) -> Complex64 {
    (Complex64::new(0.5, theta) * w.ln()).exp()
}

/// `(dγ_*μ/dμ)(p) = ρ(γ⁻¹p)·|det Dγ⁻¹(p)| / ρ(p)`.
pub fn rn_derivative(map: &dyn Diffeo, params: &RepresentationParams, p: &[f64]) -> Result<f64> {
    let (q, j) = map.inverse_with_jacobian(p)?;
    rn_from(params, p, &q, j.determinant())
}

fn rn_from(params: &RepresentationParams, p: &[f64], q: &[f64], det: f64) -> Result<f64> {
    let w = params.density_at(q)? * det.abs() / params.density_at(p)?;
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::NonFinite(format!("Radon-Nikodym derivative {w} at {p:?}")));
    }
    Ok(w)
}

/// `(Π^θ(γ)f)(p)` with `f` interpolated off-grid.
fn pulled_value(params: &RepresentationParams, map: &dyn Diffeo, f: &SampledFunction, p: &[f64]) -> Result<Complex64> {
    let q = map.apply_inverse(p)?;
    let v = f.interpolate(&q);
    if v.re == 0.0 && v.im == 0.0 {
        return Ok(v);
    }
    let (q, j) = map.inverse_with_jacobian(p)?;
    let w = rn_from(params, p, &q, j.determinant())?;
    Ok(f.interpolate(&q) * unitary_factor(w, params.theta))
}

/// `Π^θ(γ)f` on the grid of `f`.
///
/// Fails with [`Error::SupportEscapesGrid`] when the image of `supp f` leaves
/// the grid box.
pub fn apply_rep(params: &RepresentationParams, map: &dyn Diffeo, f: &SampledFunction) -> Result<SampledFunction> {
    let grid = f.grid();
    let bbox = grid.bbox();
    let slack = 1e-9 * grid.spacings().iter().copied().fold(0.0, f64::max);
    if let Some(nonzero) = f.exact_support() {
        for corner in nonzero.to_coord_box(grid).corners() {
            let image = map.apply(&corner)?;
            if !bbox.contains_with_slack(&image, slack) {
                return Err(Error::SupportEscapesGrid { point: image });
            }
        }
    }
    let out = apply_rep_truncated(params, map, f, grid)?;
    let scale = out.sup_norm();
    let full = grid.full_index_box();
    let mut escaped = None;
    full.for_each(|idx| {
        if escaped.is_some() {
            return;
        }
        let on_boundary = (0..idx.len()).any(|a| idx[a] == 0 || idx[a] + 1 == grid.counts[a]);
        if on_boundary && out.at(idx).norm() > 1e-9 * scale && f.at(idx).norm() == 0.0 {
            escaped = Some(grid.point(idx));
        }
    });
    if let Some(point) = escaped {
        return Err(Error::SupportEscapesGrid { point });
    }
    Ok(out)
}

/// `Π^θ(γ)f` sampled on `grid`, with values outside the grid of `f` taken as
/// zero.
pub fn apply_rep_truncated(
    params: &RepresentationParams,
    map: &dyn Diffeo,
    f: &SampledFunction,
    grid: &GridSpec,
) -> Result<SampledFunction> {
    if map.dim() != f.dim() || grid.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: map.dim(),
        });
    }
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut err = None;
    grid.full_index_box().for_each(|idx| {
        if err.is_some() {
            return;
        }
        match pulled_value(params, map, f, &grid.point(idx)) {
            Ok(v) => values[grid.flat_index(idx)] = v,
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    SampledFunction::from_values_tight(grid.clone(), values)
}

fn trapezoid_box_weights(grid: &GridSpec, b: &IndexBox) -> Vec<Vec<f64>> {
    (0..grid.dim())
        .map(|a| trapezoid_weights(b.lo[a], b.hi[a], grid.counts[a], grid.spacing(a)))
        .collect()
}

/// `⟨f, g⟩_μ = ∫ f·conj(g) dμ` over the common support.
pub fn inner_product_mu(params: &RepresentationParams, f: &SampledFunction, g: &SampledFunction) -> Result<Complex64> {
    f.grid().check_same(g.grid())?;
    let Some(common) = f.support().intersect(g.support()) else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    let grid = f.grid();
    let w = trapezoid_box_weights(grid, &common);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut err = None;
    common.for_each(|idx| {
        let fv = f.at(idx);
        if fv.re == 0.0 && fv.im == 0.0 {
            return;
        }
        let mut wt = 1.0;
        for a in 0..idx.len() {
            wt *= w[a][idx[a] - common.lo[a]];
        }
        match params.density_at(&grid.point(idx)) {
            Ok(rho) => acc += fv * g.at(idx).conj() * (wt * rho),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

pub fn norm_mu(params: &RepresentationParams, f: &SampledFunction) -> Result<f64> {
    Ok(inner_product_mu(params, f, f)?.re.max(0.0).sqrt())
}

/// `Tf = f·(dμ/dν)^{1/2+iθ}`, the isomorphism `L²(μ) → L²(ν)` intertwining
/// `Π^θ_μ` and `Π^θ_ν`.
pub fn intertwiner(params: &RepresentationParams, density_ratio: &ScalarFieldSpec, f: &SampledFunction) -> Result<SampledFunction> {
    let grid = f.grid();
    let mut values = f.values().to_vec();
    let mut err = None;
    f.support().for_each(|idx| {
        let flat = grid.flat_index(idx);
        let v = values[flat];
        if err.is_some() || (v.re == 0.0 && v.im == 0.0) {
            return;
        }
        let p = grid.point(idx);
        let r = density_ratio.eval(&p);
        if !(r > 0.0 && r.is_finite()) {
            err = Some(Error::NonPositiveRatio { value: r, location: p });
            return;
        }
        values[flat] = v * unitary_factor(r, params.theta);
    });
    if let Some(e) = err {
        return Err(e);
    }
    SampledFunction::from_values(grid.clone(), values, f.support().clone())
}

/// `⟨f, Π^θ(γ)g⟩_μ`, evaluated on the support of `f` only.
pub fn matrix_coefficient(
    params: &RepresentationParams,
    f: &SampledFunction,
    g: &SampledFunction,
    map: &dyn Diffeo,
) -> Result<Complex64> {
    f.grid().check_same(g.grid())?;
    let grid = f.grid();
    let s = f.support().clone();
    let w = trapezoid_box_weights(grid, &s);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut err = None;
    s.for_each(|idx| {
        let fv = f.at(idx);
        if err.is_some() || (fv.re == 0.0 && fv.im == 0.0) {
            return;
        }
        let p = grid.point(idx);
        let mut wt = 1.0;
        for a in 0..idx.len() {
            wt *= w[a][idx[a] - s.lo[a]];
        }
        let term = pulled_value(params, map, g, &p).and_then(|gv| Ok(fv * gv.conj() * (wt * params.density_at(&p)?)));
        match term {
            Ok(t) => acc += t,
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

/// Index of the largest modulus among nodes accepted by `keep`; ties go to
/// the first node in row-major order.
fn argmax_where(c: &SampledFunction, keep: impl Fn(&[f64]) -> bool) -> Option<(Vec<usize>, Complex64, usize)> {
    let grid = c.grid();
    let mut best: Option<(Vec<usize>, Complex64)> = None;
    let mut best_abs = -1.0;
    let mut searched = 0;
    grid.full_index_box().for_each(|idx| {
        let p = grid.point(idx);
        if !keep(&p) {
            return;
        }
        searched += 1;
        let v = c.at(idx);
        if v.norm() > best_abs {
            best_abs = v.norm();
            best = Some((idx.to_vec(), v));
        }
    });
    best.map(|(i, v)| (i, v, searched))
}

fn check_supported_in(f: &SampledFunction, inside: impl Fn(&[f64]) -> bool, what: &str) -> Result<()> {
    let grid = f.grid();
    let mut bad = None;
    f.support().for_each(|idx| {
        if bad.is_none() && f.at(idx).norm() > 0.0 && !inside(&grid.point(idx)) {
            bad = Some(grid.point(idx));
        }
    });
    match bad {
        Some(p) => Err(Error::Precondition(format!("function is nonzero at {p:?}, outside {what}"))),
        None => Ok(()),
    }
}

/// Searches `x ↦ (f ∗ g*)(x) = ⟨f, Π⁰(τ_x)g⟩` on `ℝ²ⁿ` for its largest
/// modulus and cross-checks the value through the translation flow `τ_x`.
pub fn sympl_witness_search(f: &SampledFunction, g: &SampledFunction, r: f64, step: f64) -> Result<WitnessReport> {
    let tol = 1e-9 * r;
    let in_ball = |p: &[f64]| p.iter().map(|v| v * v).sum::<f64>().sqrt() <= r + tol;
    check_supported_in(f, in_ball, "B(0, r)")?;
    check_supported_in(g, in_ball, "B(0, r)")?;
    let c = conv_euclid(f, &star_euclid(g)?)?;
    let two_r = 2.0 * r;
    let (idx, value, searched) = argmax_where(&c, |p| p.iter().map(|v| v * v).sum::<f64>().sqrt() < two_r)
        .ok_or_else(|| Error::Precondition("search grid has no node inside B(0, 2r)".into()))?;
    let location = c.grid().point(&idx);
    let (nf, ng) = (l2_norm(f), l2_norm(g));
    let threshold = witness_threshold(nf, ng, c.grid().bbox().volume());
    let tau = translation_symplecto(&location, r, 4.0 * r, step)?;
    let coefficient = matrix_coefficient(&RepresentationParams::new(0.0), f, g, &tau)?;
    let residual = (coefficient - value).norm();
    Ok(WitnessReport::new(location, value, threshold, c.grid().clone())
        .with("nodes_searched", searched as f64)
        .with("coefficient_re", coefficient.re)
        .with("coefficient_im", coefficient.im)
        .with("crosscheck_abs", residual)
        .with("crosscheck_rel", residual / (nf * ng).max(f64::MIN_POSITIVE)))
}

/// Searches `x ↦ (g* ∗ₕ f)(x) = ⟨f, Π^θ(ρ_x)g⟩` over `exp[W]` for its largest
/// modulus and cross-checks the value through the contact translation `ρ_x`.
pub fn cont_witness_search(
    params: &RepresentationParams,
    f: &SampledFunction,
    g: &SampledFunction,
    boxes: &ContactBoxes,
    step: f64,
) -> Result<WitnessReport> {
    let plan = boxes.validate()?;
    let slack = 1e-9 * boxes.v_half;
    check_supported_in(f, |p| plan.v.contains_with_slack(p, slack), "V")?;
    check_supported_in(g, |p| plan.v.contains_with_slack(p, slack), "V")?;
    let c = conv_heis(&star_heis(g)?, f)?;
    let in_w = |p: &[f64]| {
        GroupPoint::from_coords(p)
            .map(|x| plan.w.contains(&log_map(&x).to_coords()))
            .unwrap_or(false)
    };
    let (idx, value, searched) =
        argmax_where(&c, in_w).ok_or_else(|| Error::Precondition("search grid has no node inside exp[W]".into()))?;
    let location = c.grid().point(&idx);
    let (nf, ng) = (norm_mu(params, f)?, norm_mu(params, g)?);
    let threshold = witness_threshold(nf, ng, c.grid().bbox().volume());
    let rho = translation_contacto(&GroupPoint::from_coords(&location)?, boxes, step)?;
    let coefficient = matrix_coefficient(params, f, g, &rho)?;
    let residual = (coefficient - value).norm();
    Ok(WitnessReport::new(location, value, threshold, c.grid().clone())
        .with("theta", params.theta)
        .with("nodes_searched", searched as f64)
        .with("coefficient_re", coefficient.re)
        .with("coefficient_im", coefficient.im)
        .with("crosscheck_abs", residual)
        .with("crosscheck_rel", residual / (nf * ng).max(f64::MIN_POSITIVE)))
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub function: SampledFunction,
    /// Set when `g − Π⁰(γ)g` is numerically zero, i.e. `γ` did not move `g`.
    pub numerically_zero: bool,
}

/// `g − Π⁰(γ)g`.
pub fn small_support_reduce(g: &SampledFunction, map: &dyn Diffeo) -> Result<Reduction> {
    let moved = apply_rep(&RepresentationParams::new(0.0), map, g)?;
    let function = g.sub(&moved)?;
    let numerically_zero = !function.is_nonzero(g.sup_norm());
    Ok(Reduction {
        function,
        numerically_zero,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub t: f64,
    /// `∫_V |Π^θ(ψ_t)f|² dμ`
    pub lhs: f64,
    /// `∫_{ψ_{−t}[V]} |f|² dμ`
    pub rhs: f64,
    pub rel_diff: f64,
    pub shrunk_box: CoordBox,
}

/// Both sides of `∫_V |Π^θ(ψ_t)f|² = ∫_{ψ_{−t}[V]} |f|²` for each `t ≥ 0`,
/// where `ψ_t` is a compactly supported flow equal to the dilation `δ_t`
/// on a ball containing `V`.
pub fn dilation_shrink(
    params: &RepresentationParams,
    f: &SampledFunction,
    v_box: &CoordBox,
    times: &[f64],
    step: f64,
) -> Result<Vec<DecayRow>> {
    if params.density.is_some() {
        return Err(Error::Precondition("the shrinking construction uses Lebesgue measure".into()));
    }
    let d = f.dim();
    if d.is_multiple_of(2) || v_box.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: v_box.dim() });
    }
    let n = d / 2;
    let r1 = v_box.circumradius();
    let r2 = 1.5 * r1 + 1e-3;
    let counts = f.grid().counts.clone();
    let v_grid = GridSpec::from_box(v_box, counts.clone())?;
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        if t < 0.0 {
            return Err(Error::Precondition(format!("shrinking times must be nonnegative, got {t}")));
        }
        let psi = truncated_dilation(n, r1, r2, t, step)?;
        let pushed = apply_rep_truncated(params, &psi, f, &v_grid)?;
        let lhs = norm_mu(params, &pushed)?.powi(2);
        let lo = dilation(-t, &GroupPoint::from_coords(&v_box.lo)?).to_coords();
        let hi = dilation(-t, &GroupPoint::from_coords(&v_box.hi)?).to_coords();
        let shrunk_box = CoordBox::new(lo, hi)?;
        let rhs = integrate_over_box(f, &shrunk_box, &counts, |v| Complex64::new(v.norm_sqr(), 0.0))?.re;
        let rel_diff = (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE);
        rows.push(DecayRow {
            t,
            lhs,
            rhs,
            rel_diff,
            shrunk_box,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{IdentityMap, DEFAULT_STEP};
    use crate::sampled::{inner_product, sample};

    fn bump2(p: &[f64], c: [f64; 2], r: f64) -> f64 {
        let s = ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)) / (r * r);
        if s >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - s)).exp()
        }
    }

    #[test]
    fn identity_acts_trivially() {
        let grid = GridSpec::uniform(2, -1.0, 1.0, 21).unwrap();
        let f = sample(
            |p| Complex64::new(bump2(p, [0.1, 0.0], 0.5), 0.3),
            &grid,
            &CoordBox::cube(2, 0.7),
        )
        .unwrap();
        let id = IdentityMap { dim: 2 };
        let params = RepresentationParams::new(1.3);
        let out = apply_rep(&params, &id, &f).unwrap();
        assert!(out.sup_distance(&f).unwrap() < 1e-15);
        let mc = matrix_coefficient(&params, &f, &f, &id).unwrap();
        assert!((mc - inner_product(&f, &f).unwrap()).norm() < 1e-14);
        assert_eq!(rn_derivative(&id, &params, &[0.3, 0.1]).unwrap(), 1.0);
    }

    #[test]
    fn translation_moves_mass_and_keeps_norm() {
        let grid = GridSpec::uniform(2, -1.0, 1.0, 41).unwrap();
        let g = sample(|p| Complex64::new(bump2(p, [-0.4, 0.0], 0.2), 0.0), &grid, &CoordBox::cube(2, 1.0)).unwrap();
        let tau = translation_symplecto(&[0.6, 0.0], 0.5, 2.0, DEFAULT_STEP).unwrap();
        let red = small_support_reduce(&g, &tau).unwrap();
        assert!(!red.numerically_zero);
        let n2 = l2_norm(&red.function).powi(2);
        assert!((n2 - 2.0 * l2_norm(&g).powi(2)).abs() < 1e-9 * n2);
        let far = translation_symplecto(&[0.9, 0.0], 0.5, 2.0, DEFAULT_STEP).unwrap();
        assert!(matches!(apply_rep(&RepresentationParams::new(0.0), &far, &sample(
            |p| Complex64::new(bump2(p, [0.5, 0.0], 0.3), 0.0), &grid, &CoordBox::cube(2, 1.0)).unwrap()),
            Err(Error::SupportEscapesGrid { .. })));
    }

    #[test]
    fn intertwiner_rejects_nonpositive_ratio() {
        let grid = GridSpec::uniform(2, -1.0, 1.0, 11).unwrap();
        let f = sample(|_| Complex64::new(1.0, 0.0), &grid, &CoordBox::cube(2, 1.0)).unwrap();
        let ratio = crate::fields::parse_field("x1", crate::fields::Coords::symplectic(1)).unwrap();
        assert!(matches!(
            intertwiner(&RepresentationParams::new(0.0), &ratio, &f),
            Err(Error::NonPositiveRatio { .. })
        ));
    }
}
