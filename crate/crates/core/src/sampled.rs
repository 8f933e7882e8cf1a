//! Complex functions sampled on uniform rectangular grids.
//!
//! A [`SampledFunction`] carries its grid, its node values (row-major, last
//! axis fastest) and a node-aligned support box outside of which every value
//! is exactly zero. Integrals use the tensor-product trapezoid rule over the
//! support box; off-node evaluation is multilinear interpolation of the
//! zero-extended node values.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{inv_coords, CoordBox};

pub type SupportBox = CoordBox;

/// Relative threshold of the "numerically nonzero" test.
pub const EPS_ZERO: f64 = 1e-9;

const ALIGN_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub counts: Vec<usize>,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() || lo.len() != counts.len() {
            return Err(Error::InvalidGrid(format!(
                "inconsistent axis counts: lo {}, hi {}, counts {}",
                lo.len(),
                hi.len(),
                counts.len()
            )));
        }
        for i in 0..lo.len() {
            if !(lo[i] < hi[i]) || !lo[i].is_finite() || !hi[i].is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "axis {i}: need lo < hi, got [{}, {}]",
                    lo[i], hi[i]
                )));
            }
            if counts[i] < 2 {
                return Err(Error::InvalidGrid(format!(
                    "axis {i}: need at least 2 samples, got {}",
                    counts[i]
                )));
            }
        }
        Ok(GridSpec { lo, hi, counts })
    }

    /// Same interval and count on every axis.
    pub fn uniform(dim: usize, lo: f64, hi: f64, count: usize) -> Result<Self> {
        GridSpec::new(vec![lo; dim], vec![hi; dim], vec![count; dim])
    }

    pub fn from_box(b: &CoordBox, counts: Vec<usize>) -> Result<Self> {
        GridSpec::new(b.lo.clone(), b.hi.clone(), counts)
    }

    /// Grid with the given per-axis spacing whose first node is `lo` and whose
    /// last node is the first lattice node at or beyond `hi`.
    pub fn with_spacing(lo: &[f64], hi: &[f64], spacing: &[f64]) -> Result<Self> {
        let mut counts = Vec::with_capacity(lo.len());
        let mut his = Vec::with_capacity(lo.len());
        for i in 0..lo.len() {
            let steps = ((hi[i] - lo[i]) / spacing[i] - ALIGN_TOL).ceil().max(1.0) as usize;
            counts.push(steps + 1);
            his.push(lo[i] + steps as f64 * spacing[i]);
        }
        GridSpec::new(lo.to_vec(), his, counts)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / (self.counts[axis] - 1) as f64
    }

    pub fn spacings(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.spacing(a)).collect()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, axis: usize, k: usize) -> f64 {
        self.lo[axis] + k as f64 * self.spacing(axis)
    }

    pub fn strides(&self) -> Vec<usize> {
        let d = self.dim();
        let mut s = vec![1; d];
        for a in (0..d.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.counts[a + 1];
        }
        s
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut f = 0;
        for (a, &i) in idx.iter().enumerate() {
            f = f * self.counts[a] + i;
        }
        f
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let d = self.dim();
        let mut idx = vec![0; d];
        for a in (0..d).rev() {
            idx[a] = flat % self.counts[a];
            flat /= self.counts[a];
        }
        idx
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(a, &k)| self.node(a, k))
            .collect()
    }

    pub fn bbox(&self) -> CoordBox {
        CoordBox {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
        }
    }

    pub fn full_index_box(&self) -> IndexBox {
        IndexBox {
            lo: vec![0; self.dim()],
            hi: self.counts.iter().map(|c| c - 1).collect(),
        }
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacings().iter().product()
    }

    /// True when both grids have the same spacing on every axis.
    pub fn same_spacing(&self, other: &GridSpec) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|a| {
                let (p, q) = (self.spacing(a), other.spacing(a));
                (p - q).abs() <= ALIGN_TOL * p.abs().max(q.abs())
            })
    }

    pub fn check_same_spacing(&self, other: &GridSpec) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        for a in 0..self.dim() {
            let (p, q) = (self.spacing(a), other.spacing(a));
            if (p - q).abs() > ALIGN_TOL * p.abs().max(q.abs()) {
                return Err(Error::SpacingMismatch {
                    axis: a,
                    left: p,
                    right: q,
                });
            }
        }
        Ok(())
    }

    pub fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self.counts != other.counts {
            return Err(Error::GridMismatch(format!(
                "counts {:?} vs {:?}",
                self.counts, other.counts
            )));
        }
        self.check_same_spacing(other)?;
        for a in 0..self.dim() {
            if (self.lo[a] - other.lo[a]).abs() > ALIGN_TOL * self.spacing(a) {
                return Err(Error::GridMismatch(format!(
                    "axis {a} origin {} vs {}",
                    self.lo[a], other.lo[a]
                )));
            }
        }
        Ok(())
    }

    /// Node-aligned index box of the nodes inside `b` (inner snap).
    pub fn index_box_inside(&self, b: &CoordBox) -> Option<IndexBox> {
        let d = self.dim();
        let mut lo = vec![0; d];
        let mut hi = vec![0; d];
        for a in 0..d {
            let h = self.spacing(a);
            let l = ((b.lo[a] - self.lo[a]) / h - ALIGN_TOL).ceil().max(0.0);
            let u = ((b.hi[a] - self.lo[a]) / h + ALIGN_TOL)
                .floor()
                .min((self.counts[a] - 1) as f64);
            if l > u {
                return None;
            }
            lo[a] = l as usize;
            hi[a] = u as usize;
        }
        Some(IndexBox { lo, hi })
    }

    /// Index box of the nodes covering `b` (outer snap), clipped to the grid.
    pub fn index_box_covering(&self, b: &CoordBox) -> IndexBox {
        let d = self.dim();
        let mut lo = vec![0; d];
        let mut hi = vec![0; d];
        for a in 0..d {
            let h = self.spacing(a);
            let l = ((b.lo[a] - self.lo[a]) / h + ALIGN_TOL).floor();
            let u = ((b.hi[a] - self.lo[a]) / h - ALIGN_TOL).ceil();
            let top = (self.counts[a] - 1) as f64;
            lo[a] = l.clamp(0.0, top) as usize;
            hi[a] = u.clamp(0.0, top) as usize;
        }
        IndexBox { lo, hi }
    }
}

/// Inclusive per-axis node index ranges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexBox {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
}

impl IndexBox {
    pub fn contains(&self, idx: &[usize]) -> bool {
        idx.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(i, (l, h))| i >= l && i <= h)
    }

    pub fn extent(&self, axis: usize) -> usize {
        self.hi[axis] - self.lo[axis] + 1
    }

    pub fn intersect(&self, other: &IndexBox) -> Option<IndexBox> {
        let lo: Vec<usize> = self.lo.iter().zip(&other.lo).map(|(a, b)| *a.max(b)).collect();
        let hi: Vec<usize> = self.hi.iter().zip(&other.hi).map(|(a, b)| *a.min(b)).collect();
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            None
        } else {
            Some(IndexBox { lo, hi })
        }
    }

    pub fn to_coord_box(&self, grid: &GridSpec) -> CoordBox {
        CoordBox {
            lo: (0..grid.dim()).map(|a| grid.node(a, self.lo[a])).collect(),
            hi: (0..grid.dim()).map(|a| grid.node(a, self.hi[a])).collect(),
        }
    }

    /// Calls `f` with every multi-index of the box, last axis fastest.
    pub fn for_each(&self, mut f: impl FnMut(&[usize])) {
        let d = self.lo.len();
        let mut idx = self.lo.clone();
        loop {
            f(&idx);
            let mut a = d;
            loop {
                if a == 0 {
                    return;
                }
                a -= 1;
                if idx[a] < self.hi[a] {
                    idx[a] += 1;
                    break;
                }
                idx[a] = self.lo[a];
            }
        }
    }
}

/// Trapezoid weights on nodes `lo..=hi` of an axis with spacing `h`.
/// Grid trapezoid weights for nodes `lo..=hi` of an axis with `count` nodes.
/// Only the two end nodes of the axis get half weight, so sums over a
/// support box agree with sums over the whole grid.
pub(crate) fn trapezoid_weights(lo: usize, hi: usize, count: usize, h: f64) -> Vec<f64> {
    (lo..=hi)
        .map(|i| if i == 0 || i + 1 == count { h / 2.0 } else { h })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    grid: GridSpec,
    values: Vec<Complex64>,
    support: IndexBox,
}

impl SampledFunction {
    /// Wraps node values; values outside `support` are set to zero.
    pub fn from_values(grid: GridSpec, mut values: Vec<Complex64>, support: IndexBox) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if support.lo.len() != grid.dim()
            || (0..grid.dim()).any(|a| support.hi[a] >= grid.counts[a] || support.lo[a] > support.hi[a])
        {
            return Err(Error::InvalidGrid(format!("support {support:?} not inside grid")));
        }
        if let Some(bad) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite(format!(
                "sample at node {:?}",
                grid.multi_index(bad)
            )));
        }
        let full = grid.full_index_box();
        if support != full {
            full.for_each(|idx| {
                if !support.contains(idx) {
                    values[grid.flat_index(idx)] = Complex64::new(0.0, 0.0);
                }
            });
        }
        Ok(SampledFunction {
            grid,
            values,
            support,
        })
    }

    /// Values with the tight support of their nonzero entries (full grid if
    /// all entries vanish).
    pub fn from_values_tight(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        let support = nonzero_bounding_box(&grid, &values).unwrap_or_else(|| grid.full_index_box());
        SampledFunction::from_values(grid, values, support)
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let support = grid.full_index_box();
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        SampledFunction {
            grid,
            values,
            support,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn support(&self) -> &IndexBox {
        &self.support
    }

    pub fn support_box(&self) -> SupportBox {
        self.support.to_coord_box(&self.grid)
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn at(&self, idx: &[usize]) -> Complex64 {
        self.values[self.grid.flat_index(idx)]
    }

    /// Bounding index box of the nodes with nonzero value.
    pub fn exact_support(&self) -> Option<IndexBox> {
        nonzero_bounding_box(&self.grid, &self.values)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max|value| > ε_zero · max(1, reference)`.
    pub fn is_nonzero(&self, reference: f64) -> bool {
        self.sup_norm() > EPS_ZERO * reference.max(1.0)
    }

    /// Multilinear interpolation of the zero-extended node values.
    pub fn interpolate(&self, p: &[f64]) -> Complex64 {
        let d = self.dim();
        debug_assert_eq!(p.len(), d);
        let mut base = [0i64; 16];
        let mut frac = [0.0f64; 16];
        for a in 0..d {
            let t = (p[a] - self.grid.lo[a]) / self.grid.spacing(a);
            if !(t > -1.0 && t < self.grid.counts[a] as f64) {
                return Complex64::new(0.0, 0.0);
            }
            let mut i0 = t.floor();
            let mut fr = t - i0;
            // snap near-integer coordinates onto the node
            if fr < 1e-12 {
                fr = 0.0;
            } else if fr > 1.0 - 1e-12 {
                fr = 0.0;
                i0 += 1.0;
            }
            base[a] = i0 as i64;
            frac[a] = fr;
        }
        let strides = self.grid.strides();
        let mut acc = Complex64::new(0.0, 0.0);
        'corner: for mask in 0..1usize << d {
            let mut w = 1.0;
            let mut flat = 0usize;
            for a in 0..d {
                let up = mask >> a & 1 == 1;
                let fa = frac[a];
                if up && fa == 0.0 {
                    continue 'corner;
                }
                let i = base[a] + up as i64;
                if i < 0 || i >= self.grid.counts[a] as i64 {
                    continue 'corner;
                }
                w *= if up { fa } else { 1.0 - fa };
                flat += i as usize * strides[a];
            }
            acc += self.values[flat] * w;
        }
        acc
    }

    pub fn map_values(&self, f: impl Fn(Complex64) -> Complex64) -> SampledFunction {
        SampledFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| f(*v)).collect(),
            support: self.support.clone(),
        }
    }

    pub fn scale(&self, s: Complex64) -> SampledFunction {
        self.map_values(|v| v * s)
    }

    /// `a·self + b·other` on a common grid.
    pub fn linear_combination(
        &self,
        a: Complex64,
        other: &SampledFunction,
        b: Complex64,
    ) -> Result<SampledFunction> {
        self.grid.check_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(p, q)| a * p + b * q)
            .collect();
        let support = IndexBox {
            lo: self.support.lo.iter().zip(&other.support.lo).map(|(p, q)| *p.min(q)).collect(),
            hi: self.support.hi.iter().zip(&other.support.hi).map(|(p, q)| *p.max(q)).collect(),
        };
        SampledFunction::from_values(self.grid.clone(), values, support)
    }

    pub fn sub(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.linear_combination(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// Largest pointwise modulus of `self − other`.
    pub fn sup_distance(&self, other: &SampledFunction) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max))
    }

    /// Node values at the given index box, as a new function on the
    /// corresponding sub-grid.
    pub fn restrict(&self, b: &IndexBox) -> Result<SampledFunction> {
        let grid = GridSpec::new(
            (0..self.dim()).map(|a| self.grid.node(a, b.lo[a])).collect(),
            (0..self.dim()).map(|a| self.grid.node(a, b.hi[a])).collect(),
            (0..self.dim()).map(|a| b.extent(a)).collect(),
        )?;
        let mut values = Vec::with_capacity(grid.len());
        b.for_each(|idx| values.push(self.at(idx)));
        SampledFunction::from_values_tight(grid, values)
    }

    /// Writes the JSON header line followed by one `re,im` line per node.
    pub fn to_text(&self) -> String {
        let header = SerializedHeader {
            schema: 1,
            grid: self.grid.clone(),
            support: self.support_box(),
            support_index: self.support.clone(),
            layout: "row-major, last axis fastest; one re,im pair per line".into(),
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for v in &self.values {
            let _ = writeln!(out, "{},{}", v.re, v.im);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<SampledFunction> {
        let mut lines = text.lines();
        let header: SerializedHeader = serde_json::from_str(
            lines
                .next()
                .ok_or_else(|| Error::Serialization("empty input".into()))?,
        )
        .map_err(|e| Error::Serialization(e.to_string()))?;
        if header.schema != 1 {
            return Err(Error::Serialization(format!("unsupported schema {}", header.schema)));
        }
        let grid = GridSpec::new(header.grid.lo, header.grid.hi, header.grid.counts)?;
        let mut values = Vec::with_capacity(grid.len());
        for (i, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            let (re, im) = line
                .split_once(',')
                .ok_or_else(|| Error::Serialization(format!("value line {i}: expected re,im")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Serialization(format!("value line {i}: {e}")))
            };
            values.push(Complex64::new(parse(re)?, parse(im)?));
        }
        SampledFunction::from_values(grid, values, header.support_index)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<SampledFunction> {
        SampledFunction::from_text(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct SerializedHeader {
    schema: u32,
    grid: GridSpec,
    support: CoordBox,
    support_index: IndexBox,
    layout: String,
}

fn nonzero_bounding_box(grid: &GridSpec, values: &[Complex64]) -> Option<IndexBox> {
    let d = grid.dim();
    let mut lo = vec![usize::MAX; d];
    let mut hi = vec![0; d];
    let mut any = false;
    for (flat, v) in values.iter().enumerate() {
        if v.re != 0.0 || v.im != 0.0 {
            any = true;
            let idx = grid.multi_index(flat);
            for a in 0..d {
                lo[a] = lo[a].min(idx[a]);
                hi[a] = hi[a].max(idx[a]);
            }
        }
    }
    any.then_some(IndexBox { lo, hi })
}

/// Samples `f` at every grid node inside `support`; all other nodes are zero.
pub fn sample(
    f: impl Fn(&[f64]) -> Complex64,
    grid: &GridSpec,
    support: &SupportBox,
) -> Result<SampledFunction> {
    if support.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: support.dim(),
        });
    }
    for a in 0..grid.dim() {
        let slack = ALIGN_TOL * grid.spacing(a);
        if support.lo[a] < grid.lo[a] - slack || support.hi[a] > grid.hi[a] + slack {
            return Err(Error::SupportOutsideGrid { axis: a });
        }
    }
    let sup = grid
        .index_box_inside(support)
        .ok_or_else(|| Error::InvalidGrid("support box contains no grid node".into()))?;
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    sup.for_each(|idx| {
        values[grid.flat_index(idx)] = f(&grid.point(idx));
    });
    SampledFunction::from_values(grid.clone(), values, sup)
}

/// Samples a real function over the whole grid.
pub fn sample_real(f: impl Fn(&[f64]) -> f64, grid: &GridSpec) -> Result<SampledFunction> {
    sample(|p| Complex64::new(f(p), 0.0), grid, &grid.bbox())
}

/// Tensor-product trapezoid rule of the grid, summed over the support box.
pub fn integrate(f: &SampledFunction) -> Complex64 {
    integrate_over_index_box(f, &f.support)
}

fn integrate_over_index_box(f: &SampledFunction, b: &IndexBox) -> Complex64 {
    let grid = f.grid();
    let weights: Vec<Vec<f64>> = (0..grid.dim())
        .map(|a| trapezoid_weights(b.lo[a], b.hi[a], grid.counts[a], grid.spacing(a)))
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    b.for_each(|idx| {
        let mut w = 1.0;
        for a in 0..idx.len() {
            w *= weights[a][idx[a] - b.lo[a]];
        }
        acc += f.at(idx) * w;
    });
    acc
}

/// `⟨f, g⟩ = ∫ f·conj(g)`.
pub fn inner_product(f: &SampledFunction, g: &SampledFunction) -> Result<Complex64> {
    f.grid().check_same(g.grid())?;
    let Some(common) = f.support().intersect(g.support()) else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    let grid = f.grid();
    let weights: Vec<Vec<f64>> = (0..grid.dim())
        .map(|a| trapezoid_weights(common.lo[a], common.hi[a], grid.counts[a], grid.spacing(a)))
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    common.for_each(|idx| {
        let mut w = 1.0;
        for a in 0..idx.len() {
            w *= weights[a][idx[a] - common.lo[a]];
        }
        acc += f.at(idx) * g.at(idx).conj() * w;
    });
    Ok(acc)
}

pub fn l2_norm(f: &SampledFunction) -> f64 {
    integrate(&f.map_values(|v| Complex64::new(v.norm_sqr(), 0.0)))
        .re
        .max(0.0)
        .sqrt()
}

/// Trapezoid integral of `|f|²` times a positive weight.
pub fn weighted_norm_sqr(f: &SampledFunction, weight: impl Fn(&[f64]) -> f64) -> f64 {
    let grid = f.grid().clone();
    let mut values = f.values.clone();
    for (flat, v) in values.iter_mut().enumerate() {
        if v.re != 0.0 || v.im != 0.0 {
            let p = grid.point(&grid.multi_index(flat));
            *v = Complex64::new(v.norm_sqr() * weight(&p), 0.0);
        }
    }
    let g = SampledFunction {
        grid,
        values,
        support: f.support.clone(),
    };
    integrate(&g).re
}

/// Trapezoid integral of `h(f)` over an arbitrary box, on a box-fitted grid with
/// `counts` nodes per axis; `f` is evaluated by interpolation.
pub fn integrate_over_box(
    f: &SampledFunction,
    b: &CoordBox,
    counts: &[usize],
    h: impl Fn(Complex64) -> Complex64,
) -> Result<Complex64> {
    if b.volume() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let grid = GridSpec::from_box(b, counts.to_vec())?;
    let weights: Vec<Vec<f64>> = (0..grid.dim())
        .map(|a| trapezoid_weights(0, grid.counts[a] - 1, grid.counts[a], grid.spacing(a)))
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    grid.full_index_box().for_each(|idx| {
        let mut w = 1.0;
        for a in 0..idx.len() {
            w *= weights[a][idx[a]];
        }
        acc += h(f.interpolate(&grid.point(idx))) * w;
    });
    Ok(acc)
}

fn check_axis_symmetric(grid: &GridSpec, axis: usize) -> Result<()> {
    if (grid.lo[axis] + grid.hi[axis]).abs() > ALIGN_TOL * grid.spacing(axis) {
        return Err(Error::NotInversionSymmetric { axis });
    }
    Ok(())
}

/// `g*(y) = conj(g(−y))` on a grid symmetric about the origin.
pub fn star_euclid(g: &SampledFunction) -> Result<SampledFunction> {
    let grid = g.grid().clone();
    for a in 0..grid.dim() {
        check_axis_symmetric(&grid, a)?;
    }
    let mirror = |idx: &[usize]| -> Vec<usize> {
        idx.iter()
            .enumerate()
            .map(|(a, &i)| grid.counts[a] - 1 - i)
            .collect()
    };
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    grid.full_index_box().for_each(|idx| {
        values[grid.flat_index(idx)] = g.at(&mirror(idx)).conj();
    });
    let s = g.support();
    let support = IndexBox {
        lo: (0..grid.dim()).map(|a| grid.counts[a] - 1 - s.hi[a]).collect(),
        hi: (0..grid.dim()).map(|a| grid.counts[a] - 1 - s.lo[a]).collect(),
    };
    SampledFunction::from_values(grid, values, support)
}

/// `g*(y) = conj(g(y⁻¹))` for a function on `Hₙ`.
///
/// The `x`, `y` and `z` axes must be symmetric about 0. Inversion moves `z` off
/// the lattice, so values are interpolated; the output grid keeps the spacing
/// and extends the `z` axis to cover the inverse of the support box.
pub fn star_heis(g: &SampledFunction) -> Result<SampledFunction> {
    let grid = g.grid();
    let d = grid.dim();
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: d,
        });
    }
    for a in 0..d {
        check_axis_symmetric(grid, a)?;
    }
    let zaxis = d - 1;
    let inv_box = crate::geometry::heisenberg_inverse_box(&g.support_box());
    let hz = grid.spacing(zaxis);
    let extra_lo = ((grid.lo[zaxis] - inv_box.lo[zaxis]) / hz - ALIGN_TOL).ceil().max(0.0) as usize;
    let extra_hi = ((inv_box.hi[zaxis] - grid.hi[zaxis]) / hz - ALIGN_TOL).ceil().max(0.0) as usize;
    let extra = extra_lo.max(extra_hi);
    let mut lo = grid.lo.clone();
    let mut hi = grid.hi.clone();
    let mut counts = grid.counts.clone();
    lo[zaxis] -= extra as f64 * hz;
    hi[zaxis] += extra as f64 * hz;
    counts[zaxis] += 2 * extra;
    let out_grid = GridSpec::new(lo, hi, counts)?;
    let support = out_grid.index_box_covering(&inv_box);
    let mut values = vec![Complex64::new(0.0, 0.0); out_grid.len()];
    let mut q = vec![0.0; d];
    support.for_each(|idx| {
        let p = out_grid.point(idx);
        inv_coords(&p, &mut q);
        values[out_grid.flat_index(idx)] = g.interpolate(&q).conj();
    });
    SampledFunction::from_values(out_grid, values, support)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn constants_integrate_to_volume() {
        let grid = GridSpec::new(vec![0.0, -1.0], vec![2.0, 0.5], vec![5, 7]).unwrap();
        let one = sample(|_| c(1.0), &grid, &grid.bbox()).unwrap();
        assert!(one.values().iter().all(|v| *v == c(1.0)));
        assert!((integrate(&one).re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn linear_and_odd_integrands_vanish() {
        let grid = GridSpec::uniform(2, -1.0, 1.0, 9).unwrap();
        let lin = sample_real(|p| 3.0 * p[0] - p[1], &grid).unwrap();
        assert!(integrate(&lin).norm() < 1e-12);
        let odd = sample_real(|p| p[0].powi(3) * (p[1] * 4.0).cos(), &grid).unwrap();
        assert!(integrate(&odd).norm() < 1e-12);
    }

    #[test]
    fn sine_on_half_period() {
        let grid = GridSpec::uniform(1, 0.0, std::f64::consts::PI, 101).unwrap();
        let f = sample_real(|p| p[0].sin(), &grid).unwrap();
        assert!((integrate(&f).re - 2.0).abs() < 1e-3);
    }

    #[test]
    fn support_outside_grid_is_rejected() {
        let grid = GridSpec::uniform(1, 0.0, 1.0, 11).unwrap();
        let bad = CoordBox::new(vec![-0.5], vec![0.5]).unwrap();
        assert!(matches!(
            sample(|_| c(1.0), &grid, &bad),
            Err(Error::SupportOutsideGrid { axis: 0 })
        ));
    }

    #[test]
    fn sampling_zeroes_outside_support() {
        let grid = GridSpec::uniform(1, 0.0, 1.0, 11).unwrap();
        let sup = CoordBox::new(vec![0.25], vec![0.61]).unwrap();
        let f = sample(|_| c(1.0), &grid, &sup).unwrap();
        assert_eq!(f.support().lo, vec![3]);
        assert_eq!(f.support().hi, vec![6]);
        assert_eq!(f.at(&[2]), c(0.0));
        assert_eq!(f.at(&[7]), c(0.0));
        // grid trapezoid: four interior nodes of weight h
        assert!((integrate(&f).re - 0.4).abs() < 1e-12);
    }

    #[test]
    fn disjoint_supports_are_orthogonal() {
        let grid = GridSpec::uniform(1, 0.0, 1.0, 21).unwrap();
        let f = sample(|_| c(1.0), &grid, &CoordBox::new(vec![0.0], vec![0.3]).unwrap()).unwrap();
        let g = sample(|_| c(2.0), &grid, &CoordBox::new(vec![0.5], vec![1.0]).unwrap()).unwrap();
        assert_eq!(inner_product(&f, &g).unwrap(), c(0.0));
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = SampledFunction::zeros(GridSpec::uniform(1, 0.0, 1.0, 11).unwrap());
        let b = SampledFunction::zeros(GridSpec::uniform(1, 0.0, 1.0, 12).unwrap());
        assert!(inner_product(&a, &b).is_err());
    }

    #[test]
    fn interpolation_is_exact_on_multilinear_functions() {
        let grid = GridSpec::new(vec![-1.0, 0.0, 2.0], vec![1.0, 3.0, 4.0], vec![5, 7, 3]).unwrap();
        let f = sample_real(|p| 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[2] + p[0] * p[1] * p[2], &grid)
            .unwrap();
        for p in [[0.13, 1.7, 2.2], [-0.99, 2.99, 3.5], [1.0, 3.0, 4.0], [0.5, 0.5, 2.0]] {
            let exact = 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[2] + p[0] * p[1] * p[2];
            assert!((f.interpolate(&p).re - exact).abs() < 1e-12, "{p:?}");
        }
        assert_eq!(f.interpolate(&[5.0, 1.0, 3.0]), c(0.0));
    }

    #[test]
    fn star_euclid_is_an_involution() {
        let grid = GridSpec::uniform(2, -1.0, 1.0, 11).unwrap();
        let g = sample(
            |p| Complex64::new(p[0] + 0.3, p[1] * p[0]),
            &grid,
            &CoordBox::new(vec![-0.4, -0.2], vec![0.8, 0.6]).unwrap(),
        )
        .unwrap();
        let gs = star_euclid(&g).unwrap();
        assert_eq!(gs.support_box().lo, vec![-0.8, -0.6]);
        let back = star_euclid(&gs).unwrap();
        assert!(back.sup_distance(&g).unwrap() < 1e-8);
        let even = sample_real(|p| (-p[0] * p[0] - p[1] * p[1]).exp(), &grid).unwrap();
        assert!(star_euclid(&even).unwrap().sup_distance(&even).unwrap() < 1e-15);
    }

    #[test]
    fn star_euclid_requires_symmetric_grid() {
        let grid = GridSpec::uniform(1, 0.0, 1.0, 11).unwrap();
        assert!(matches!(
            star_euclid(&SampledFunction::zeros(grid)),
            Err(Error::NotInversionSymmetric { axis: 0 })
        ));
    }

    #[test]
    fn star_heis_support_is_the_inverse_box() {
        let grid = GridSpec::uniform(3, -1.0, 1.0, 17).unwrap();
        let sup = CoordBox::new(vec![0.25, 0.5, -0.25], vec![0.75, 1.0, 0.5]).unwrap();
        let g = sample(|_| c(1.0), &grid, &sup).unwrap();
        let gs = star_heis(&g).unwrap();
        let expected = crate::geometry::heisenberg_inverse_box(&g.support_box());
        // corners pushed through the inversion
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for corner in g.support_box().corners() {
            let mut q = [0.0; 3];
            inv_coords(&corner, &mut q);
            for a in 0..3 {
                lo[a] = lo[a].min(q[a]);
                hi[a] = hi[a].max(q[a]);
            }
        }
        for a in 0..3 {
            assert!((expected.lo[a] - lo[a]).abs() < 1e-12);
            assert!((expected.hi[a] - hi[a]).abs() < 1e-12);
        }
        let got = gs.support_box();
        let h = 2.0 / 16.0;
        for a in 0..3 {
            assert!(got.lo[a] <= lo[a] + 1e-12 && got.lo[a] > lo[a] - h - 1e-12);
            assert!(got.hi[a] >= hi[a] - 1e-12 && got.hi[a] < hi[a] + h + 1e-12);
        }
        let tight = gs.exact_support().unwrap().to_coord_box(gs.grid());
        assert!(got.contains_box(&tight, 1e-12));
    }

    #[test]
    fn text_round_trip() {
        let grid = GridSpec::new(vec![-1.0, 0.0], vec![1.0, 0.7], vec![4, 3]).unwrap();
        let f = sample(
            |p| Complex64::new(p[0].sin() / 3.0, p[1].exp()),
            &grid,
            &CoordBox::new(vec![-0.5, 0.0], vec![1.0, 0.7]).unwrap(),
        )
        .unwrap();
        let back = SampledFunction::from_text(&f.to_text()).unwrap();
        assert_eq!(back, f);
        assert!(SampledFunction::from_text("{\"schema\":2}").is_err());
    }
}
