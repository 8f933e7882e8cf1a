//! Seeded random test functions: finite sums of translated bump products.
//!
//! Every generated function is smooth, compactly supported inside a
//! prescribed ball or cube, and nonzero. Along `z` a term may be replaced by
//! a finite difference of shifted bumps, which kills its low `z`-moments.

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CoordBox;
use crate::sampled::{sample, GridSpec, SampledFunction};

/// `exp(−1/(1 − t²))` on `|t| < 1`, zero elsewhere.
pub fn bump_1d(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// One product term `c·Πₐ φ((pₐ − centerₐ)/radiusₐ)`.
///
/// With `z_difference = Some((m, s))` the last factor becomes the `m`-th
/// forward difference `Σⱼ (−1)ʲ C(m, j) φ((z − center − j·s)/radius)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpTerm {
    pub coeff: Complex64,
    pub center: Vec<f64>,
    pub radius: Vec<f64>,
    pub z_difference: Option<(usize, f64)>,
}

fn binomial(m: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

impl BumpTerm {
    pub fn eval(&self, p: &[f64]) -> Complex64 {
        let d = p.len();
        let mut prod = 1.0;
        for a in 0..d {
            let factor = match (a + 1 == d, self.z_difference) {
                (true, Some((m, s))) => (0..=m)
                    .map(|j| {
                        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                        sign * binomial(m, j) * bump_1d((p[a] - self.center[a] - j as f64 * s) / self.radius[a])
                    })
                    .sum(),
                _ => bump_1d((p[a] - self.center[a]) / self.radius[a]),
            };
            if factor == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            prod *= factor;
        }
        self.coeff * prod
    }

    pub fn bounding_box(&self) -> CoordBox {
        let d = self.center.len();
        let mut lo: Vec<f64> = (0..d).map(|a| self.center[a] - self.radius[a]).collect();
        let mut hi: Vec<f64> = (0..d).map(|a| self.center[a] + self.radius[a]).collect();
        if let Some((m, s)) = self.z_difference {
            let shift = m as f64 * s;
            lo[d - 1] = lo[d - 1].min(lo[d - 1] + shift);
            hi[d - 1] = hi[d - 1].max(hi[d - 1] + shift);
        }
        CoordBox { lo, hi }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSum {
    pub terms: Vec<BumpTerm>,
}

impl BumpSum {
    pub fn eval(&self, p: &[f64]) -> Complex64 {
        self.terms.iter().map(|t| t.eval(p)).sum()
    }

    pub fn bounding_box(&self) -> CoordBox {
        let mut b = self.terms[0].bounding_box();
        for t in &self.terms[1..] {
            let o = t.bounding_box();
            for a in 0..b.dim() {
                b.lo[a] = b.lo[a].min(o.lo[a]);
                b.hi[a] = b.hi[a].max(o.hi[a]);
            }
        }
        b
    }

    /// Samples onto `grid` with the bounding box, clipped to the grid, as support.
    pub fn sample(&self, grid: &GridSpec) -> Result<SampledFunction> {
        let mut b = self.bounding_box();
        for a in 0..b.dim() {
            b.lo[a] = b.lo[a].max(grid.lo[a]);
            b.hi[a] = b.hi[a].min(grid.hi[a]);
        }
        sample(|p| self.eval(p), grid, &b)
    }
}

/// Where generated terms must live.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    /// Euclidean ball `B(0, r)` in `ℝᵈ`.
    Ball { dim: usize, r: f64 },
    /// Cube `[−h, h]ᵈ` with the last axis central.
    Cube { dim: usize, half: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub region: Region,
    pub max_terms: usize,
    /// Largest finite-difference order along the last axis; 0 disables.
    pub max_z_difference: usize,
    /// Smallest bump radius.
    pub min_radius: f64,
    /// When positive, finite-difference shifts are rounded to a nonzero
    /// multiple of this length, so the differences are exact on a grid with
    /// that spacing.
    pub shift_quantum: f64,
}

pub struct InputGenerator {
    rng: ChaCha8Rng,
    config: GeneratorConfig,
}

impl InputGenerator {
    pub fn new(seed: u64, config: GeneratorConfig) -> Self {
        InputGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            config,
        }
    }

    pub fn bump_sum(&mut self) -> Result<BumpSum> {
        let count = self.rng.random_range(1..=self.config.max_terms.max(1));
        let mut terms = Vec::with_capacity(count);
        for _ in 0..count {
            terms.push(self.term()?);
        }
        Ok(BumpSum { terms })
    }

    fn term(&mut self) -> Result<BumpTerm> {
        let rng = &mut self.rng;
        let coeff = Complex64::new(rng.random_range(0.5..1.5), rng.random_range(-1.0..1.0));
        let min_r = self.config.min_radius;
        match self.config.region {
            Region::Ball { dim, r } => {
                let width = rng.random_range(0.35..0.6) * r;
                let radius: Vec<f64> = (0..dim).map(|_| (width * rng.random_range(0.6..1.0)).max(min_r)).collect();
                let diag = radius.iter().map(|v| v * v).sum::<f64>().sqrt();
                let room = r - diag;
                if room <= 0.0 {
                    return Err(Error::Precondition(format!("ball radius {r} too small for bumps of radius {min_r}")));
                }
                let mut center: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                let norm = center.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
                let target = rng.random_range(0.0..0.9) * room;
                for c in &mut center {
                    *c *= target / norm;
                }
                Ok(BumpTerm {
                    coeff,
                    center,
                    radius,
                    z_difference: None,
                })
            }
            Region::Cube { dim, half } => {
                let m = if self.config.max_z_difference > 0 {
                    rng.random_range(0..=self.config.max_z_difference)
                } else {
                    0
                };
                let quantum = self.config.shift_quantum;
                let mut radius = Vec::with_capacity(dim);
                let mut center = Vec::with_capacity(dim);
                let mut shift = 0.0;
                for a in 0..dim {
                    let rad = (rng.random_range(0.3..0.55) * half).max(min_r);
                    if a + 1 == dim && m > 0 {
                        shift = rad * 0.5 / m as f64;
                        if quantum > 0.0 {
                            shift = (shift / quantum).round().max(1.0) * quantum;
                        }
                    }
                    let shift_room = if a + 1 == dim { m as f64 * shift } else { 0.0 };
                    let room = half - rad - shift_room;
                    if room < 0.0 {
                        return Err(Error::Precondition(format!("cube half-width {half} too small for bumps of radius {min_r}")));
                    }
                    let c = rng.random_range(-0.9..0.9) * room - shift_room / 2.0;
                    radius.push(rad);
                    center.push(c);
                }
                let z_difference = (m > 0).then_some((m, shift));
                Ok(BumpTerm {
                    coeff,
                    center,
                    radius,
                    z_difference,
                })
            }
        }
    }

    /// A generated function sampled on `grid`, retried until it is nonzero
    /// on the grid.
    pub fn sampled(&mut self, grid: &GridSpec) -> Result<SampledFunction> {
        for _ in 0..16 {
            let f = self.bump_sum()?.sample(grid)?;
            if f.is_nonzero(0.0) && f.sup_norm() > 1e-6 {
                return Ok(f);
            }
        }
        Err(Error::NumericallyZero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_functions_stay_in_their_region() {
        let grid = GridSpec::uniform(3, -1.0, 1.0, 17).unwrap();
        let mut generator = InputGenerator::new(
            3,
            GeneratorConfig {
                region: Region::Cube { dim: 3, half: 0.5 },
                max_terms: 3,
                max_z_difference: 2,
                min_radius: 0.1,
                shift_quantum: 0.0,
            },
        );
        for _ in 0..10 {
            let s = generator.bump_sum().unwrap();
            let b = s.bounding_box();
            assert!(CoordBox::cube(3, 0.5).contains_box(&b, 1e-12), "{b:?}");
            let f = s.sample(&grid).unwrap();
            assert!(f.is_nonzero(0.0));
        }
    }

    #[test]
    fn same_seed_same_function() {
        let config = GeneratorConfig {
            region: Region::Ball { dim: 2, r: 0.8 },
            max_terms: 3,
            max_z_difference: 0,
            min_radius: 0.05,
            shift_quantum: 0.0,
        };
        let a = InputGenerator::new(7, config.clone()).bump_sum().unwrap();
        let b = InputGenerator::new(7, config).bump_sum().unwrap();
        assert_eq!(a, b);
        let corner_norm = a.terms.iter().map(|t| {
            let c = t.center.iter().map(|v| v * v).sum::<f64>().sqrt();
            c + t.radius.iter().map(|v| v * v).sum::<f64>().sqrt()
        });
        for r in corner_norm {
            assert!(r <= 0.8 + 1e-12);
        }
    }
}
