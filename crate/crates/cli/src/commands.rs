use std::sync::Arc;

use anyhow::{bail, Context, Result};
use diffeo_reps::calculus::{conv_euclid, conv_euclid_direct, conv_heis, minimal_k, moment_profile, nonvanishing_certificate, op_s, DEFAULT_K_MAX};
use diffeo_reps::fields::{
    check_structure, contact_field, hamiltonian_field, parse_field, translation_contacto, translation_symplecto,
    Composition, ContactBoxes, Coords, Diffeo, FlowMap, StructureKind, MAX_DIM,
};
use diffeo_reps::generators::{bump_1d, GeneratorConfig, InputGenerator, Region};
use diffeo_reps::geometry::{group_mul, CoordBox, GroupPoint, LieVector, exp_map};
use diffeo_reps::representations::{
    apply_rep, cont_witness_search, dilation_shrink, rn_derivative, sympl_witness_search, RepresentationParams,
};
use diffeo_reps::sampled::{integrate, l2_norm, GridSpec, SampledFunction};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::report::Report;

/// Resolved command-line options shared by all subcommands.
#[derive(Clone, Debug)]
pub struct Options {
    pub n: Option<usize>,
    pub res: Option<usize>,
    pub theta: Option<f64>,
    pub step: f64,
    pub tol: Option<f64>,
    pub seed: u64,
    pub f: Option<String>,
    pub g: Option<String>,
    pub contact: bool,
}

impl Options {
    pub fn validate(&self) -> Result<()> {
        if let Some(n) = self.n {
            if n == 0 || 2 * n + 1 > MAX_DIM {
                bail!("--n must be between 1 and {}, got {n}", (MAX_DIM - 1) / 2);
            }
        }
        if let Some(res) = self.res {
            if res < 9 {
                bail!("--res must be at least 9 nodes per axis, got {res}");
            }
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                bail!("--tol must be positive, got {tol}");
            }
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            bail!("--step must be positive, got {}", self.step);
        }
        if let Some(theta) = self.theta {
            if !theta.is_finite() {
                bail!("--theta must be finite");
            }
        }
        Ok(())
    }

    fn n(&self) -> usize {
        self.n.unwrap_or(1)
    }

    fn res(&self, default: usize) -> usize {
        self.res.unwrap_or(default)
    }

    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn record(&self, report: &mut Report, n: usize, res: Option<usize>) {
        report.input("n", n);
        if let Some(res) = res {
            report.input("res", res);
        }
        report.input("step", self.step);
        report.input("seed", self.seed);
    }
}

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn norm(p: &[f64]) -> f64 {
    p.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Uniform point in the ball of radius `r`, by rejection from the cube.
fn point_in_ball(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..dim).map(|_| rng.random_range(-r..r)).collect();
        if norm(&p) < r {
            return p;
        }
    }
}

fn point_in_shell(rng: &mut ChaCha8Rng, dim: usize, r1: f64, r2: f64) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..dim).map(|_| rng.random_range(-r2..r2)).collect();
        let s = norm(&p);
        if s > r1 && s < r2 {
            return p;
        }
    }
}

/// Samples a DSL expression on every node and trims the support to its
/// nonzero nodes.
fn sample_dsl(source: &str, coords: Coords, grid: &GridSpec) -> Result<SampledFunction> {
    let spec = parse_field(source, coords).with_context(|| format!("malformed function '{source}'"))?;
    let values = (0..grid.len())
        .map(|i| c(spec.eval(&grid.point(&grid.multi_index(i)))))
        .collect();
    Ok(SampledFunction::from_values_tight(grid.clone(), values)?)
}

fn radial_bump(grid: &GridSpec, center: &[f64], radius: f64, phase: impl Fn(&[f64]) -> f64) -> Result<SampledFunction> {
    let values = (0..grid.len())
        .map(|i| {
            let p = grid.point(&grid.multi_index(i));
            let d: Vec<f64> = p.iter().zip(center).map(|(a, b)| a - b).collect();
            Complex64::from_polar(bump_1d(norm(&d) / radius), phase(&p))
        })
        .collect();
    Ok(SampledFunction::from_values_tight(grid.clone(), values)?)
}

/// `f` and `g` from `--f`/`--g` when given, otherwise drawn from the seeded
/// generator.
fn input_pair(
    opts: &Options,
    report: &mut Report,
    coords: Coords,
    grid: &GridSpec,
    config: GeneratorConfig,
) -> Result<(SampledFunction, SampledFunction)> {
    let mut generator = InputGenerator::new(opts.seed, config);
    let mut pick = |name: &str, dsl: &Option<String>| -> Result<SampledFunction> {
        match dsl {
            Some(src) => {
                report.input(name, src);
                sample_dsl(src, coords, grid)
            }
            None => {
                report.input(name, "generated");
                Ok(generator.sampled(grid)?)
            }
        }
    };
    let f = pick("f", &opts.f)?;
    let g = pick("g", &opts.g)?;
    Ok((f, g))
}

fn abs_integral(f: &SampledFunction) -> f64 {
    integrate(&f.map_values(|v| c(v.norm()))).re
}

fn grid_record(grid: &GridSpec) -> serde_json::Value {
    json!({ "lo": grid.lo, "hi": grid.hi, "counts": grid.counts })
}

/// Default sets for contact translations on `Hₙ`.
pub fn default_boxes(n: usize) -> ContactBoxes {
    let mut w = vec![1.2; 2 * n];
    w.push(2.5 + 0.25 * (n as f64 - 1.0));
    ContactBoxes::new(n, 0.5, w, vec![7.0 + n as f64; 2 * n + 1])
}

pub fn conv_euclid_cmd(opts: &Options) -> Result<Report> {
    let mut report = Report::new("conv-euclid");
    let (n, res) = (opts.n(), opts.res(33));
    opts.record(&mut report, n, Some(res));
    let grid = GridSpec::uniform(2 * n, -1.0, 1.0, res)?;
    let config = GeneratorConfig {
        region: Region::Ball { dim: 2 * n, r: 0.45 },
        max_terms: 3,
        max_z_difference: 0,
        min_radius: (4.0 * grid.spacing(0)).min(0.2),
        shift_quantum: 0.0,
    };
    let (f, g) = input_pair(opts, &mut report, Coords::symplectic(n), &grid, config)?;
    let fast = conv_euclid(&f, &g)?;
    report.result("output_grid", grid_record(fast.grid()));
    report.result("sup_norm", fast.sup_norm());

    let cost = (0..f.dim()).map(|a| f.support().extent(a) as f64).product::<f64>() * fast.grid().len() as f64;
    if cost <= 2e9 {
        let direct = conv_euclid_direct(&f, &g)?;
        let rel = fast.sup_distance(&direct)? / direct.sup_norm().max(f64::MIN_POSITIVE);
        report.at_most("fast_vs_direct", rel, opts.tol(1e-10));
    } else {
        report.result("direct_reference", "skipped: too large");
    }
    let fubini = (integrate(&fast) - integrate(&f) * integrate(&g)).norm() / (abs_integral(&f) * abs_integral(&g)).max(f64::MIN_POSITIVE);
    report.at_most("fubini", fubini, 1e-10);
    Ok(report)
}

pub fn conv_heis_cmd(opts: &Options) -> Result<Report> {
    let mut report = Report::new("conv-heis");
    let (n, res) = (opts.n(), opts.res(25));
    opts.record(&mut report, n, Some(res));
    let grid = GridSpec::uniform(2 * n + 1, -1.0, 1.0, res)?;
    let config = GeneratorConfig {
        region: Region::Cube { dim: 2 * n + 1, half: 0.9 },
        max_terms: 2,
        max_z_difference: 0,
        min_radius: (4.0 * grid.spacing(0)).min(0.2),
        shift_quantum: 0.0,
    };
    let (f, g) = input_pair(opts, &mut report, Coords::heisenberg(n), &grid, config)?;
    let conv = conv_heis(&f, &g)?;
    report.result("output_grid", grid_record(conv.grid()));
    report.result("sup_norm", conv.sup_norm());

    let s_conv = op_s(&conv)?;
    let s_pair = conv_euclid(&op_s(&f)?, &op_s(&g)?)?;
    let s_rel = sup_distance_on_union(&s_conv, &s_pair)? / s_pair.sup_norm().max(f64::MIN_POSITIVE);
    report.at_most("s_homomorphism", s_rel, opts.tol(1e-10));
    let fubini = (integrate(&conv) - integrate(&f) * integrate(&g)).norm() / (abs_integral(&f) * abs_integral(&g)).max(f64::MIN_POSITIVE);
    report.at_most("fubini", fubini, 1e-10);
    Ok(report)
}

/// Sup distance of two functions on grids of equal spacing, comparing values
/// node by node on the union of their boxes.
fn sup_distance_on_union(a: &SampledFunction, b: &SampledFunction) -> Result<f64> {
    a.grid().check_same_spacing(b.grid())?;
    let mut worst: f64 = 0.0;
    for (x, y) in [(a, b), (b, a)] {
        let grid = x.grid();
        for i in 0..grid.len() {
            let p = grid.point(&grid.multi_index(i));
            worst = worst.max((x.values()[i] - y.interpolate(&p)).norm());
        }
    }
    Ok(worst)
}

pub fn minimal_k_cmd(opts: &Options) -> Result<Report> {
    let mut report = Report::new("minimal-k");
    let (n, res) = (opts.n(), opts.res(33));
    opts.record(&mut report, n, Some(res));
    let grid = GridSpec::uniform(2 * n + 1, -1.0, 1.0, res)?;
    let source = opts.f.clone().unwrap_or_else(|| "bump(0.5, 1) * z".to_string());
    report.input("f", &source);
    let f = sample_dsl(&source, Coords::heisenberg(n), &grid)?;
    let mk = minimal_k(&f, DEFAULT_K_MAX)?;
    report.result("k", mk.k);
    report.result("integral_value", [mk.integral_value.re, mk.integral_value.im]);
    report.result(
        "tests",
        mk.tests.iter().enumerate().map(|(j, (s, t))| json!({"j": j, "statistic": s, "threshold": t})).collect::<Vec<_>>(),
    );

    // the first z-moment that does not vanish, computed without iterating T
    let zmax = grid.hi[2 * n].abs().max(grid.lo[2 * n].abs());
    let extent = grid.hi[2 * n] - grid.lo[2 * n];
    let oracle = (0..=DEFAULT_K_MAX).find(|&j| {
        let m = moment_profile(&f, j).map(|m| m.sup_norm()).unwrap_or(0.0);
        m > 1e-8 * f.sup_norm() * extent * zmax.powi(j as i32)
    });
    report.result("oracle_k", oracle);
    report.holds("k_matches_moment_oracle", oracle == Some(mk.k));
    if oracle == Some(mk.k) {
        // S Tᵏf = (−1)ᵏ/k! ∫ zᵏ f dz once the lower moments vanish
        let factorial: f64 = (1..=mk.k).map(|i| i as f64).product();
        let sign = if mk.k % 2 == 0 { 1.0 } else { -1.0 };
        let predicted = moment_profile(&f, mk.k)?.scale(c(sign / factorial));
        let rel = mk.result.sup_distance(&predicted)? / predicted.sup_norm();
        report.at_most("moment_value", rel, opts.tol(1e-10));
    }
    Ok(report)
}

pub fn certificate_cmd(opts: &Options) -> Result<Report> {
    let mut report = Report::new("certificate");
    let (n, res) = (opts.n(), opts.res(33));
    opts.record(&mut report, n, Some(res));
    let grid = GridSpec::uniform(2 * n + 1, -1.0, 1.0, res)?;
    let config = GeneratorConfig {
        region: Region::Cube { dim: 2 * n + 1, half: 0.9 },
        max_terms: 2,
        max_z_difference: 2,
        min_radius: 0.15,
        shift_quantum: grid.spacing(2 * n),
    };
    let (f, g) = input_pair(opts, &mut report, Coords::heisenberg(n), &grid, config)?;
    let witness = nonvanishing_certificate(&f, &g)?;
    let chain = witness.diagnostic("chain_residual").unwrap_or(f64::INFINITY);
    report.holds("witness_nonzero", witness.passed);
    report.at_most("chain_residual", chain, opts.tol(1e-6));
    report.result("witness", &witness);
    Ok(report)
}

pub fn flow_check_cmd(opts: &Options) -> Result<Report> {
    let mut report = Report::new("flow-check");
    let n = opts.n();
    opts.record(&mut report, n, None);
    let (coords, kind, default) = if opts.contact {
        (Coords::heisenberg(n), StructureKind::Contact, "bump(1, 2) * (z + x1 - y1)")
    } else {
        (Coords::symplectic(n), StructureKind::Symplectic, "bump(1, 2) * x1 * y1")
    };
    let source = opts.f.clone().unwrap_or_else(|| default.to_string());
    report.input("f", &source);
    report.input("geometry", if opts.contact { "contact" } else { "symplectic" });
    let spec = parse_field(&source, coords).with_context(|| format!("malformed function '{source}'"))?;
    let field = Arc::new(if opts.contact { contact_field(&spec, n)? } else { hamiltonian_field(&spec, n)? });
    let map = FlowMap::from_shared(field.clone(), 1.0, opts.step)?;

    let mut rng = opts.rng();
    let points: Vec<Vec<f64>> = (0..16).map(|_| point_in_ball(&mut rng, coords.dim(), 1.5)).collect();
    let tol = opts.tol(1e-6);
    let structure = check_structure(&map, kind, &points, tol)?;
    report.at_most("structure_residual", structure.max_residual, tol);
    if !opts.contact {
        let mut worst: f64 = 0.0;
        for p in &points {
            let (_, j) = map.apply_with_jacobian(p)?;
            worst = worst.max((j.determinant() - 1.0).abs());
        }
        report.at_most("volume_residual", worst, tol);
    }

    // endpoint error against a step/4 reference, at step and step/2
    let coarse = map;
    let half = FlowMap::from_shared(field.clone(), 1.0, opts.step / 2.0)?;
    let fine = FlowMap::from_shared(field, 1.0, opts.step / 4.0)?;
    let (mut e1, mut e2): (f64, f64) = (0.0, 0.0);
    for p in &points {
        let r = fine.apply(p)?;
        e1 = e1.max(dist(&coarse.apply(p)?, &r));
        e2 = e2.max(dist(&half.apply(p)?, &r));
    }
    report.result("endpoint_error_step", e1);
    report.result("endpoint_error_half_step", e2);
    report.result("points", points.len());
    Ok(report)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn translate_sympl_cmd(opts: &Options) -> Result<Report> {
    let mut report = Report::new("translate-sympl");
    let n = opts.n();
    opts.record(&mut report, n, None);
    let (r, r_outer) = (1.0, 4.0);
    let mut rng = opts.rng();
    let x = point_in_ball(&mut rng, 2 * n, 0.9 * r);
    report.input("x", &x);
    report.input("r", r);
    report.input("r_outer", r_outer);
    let tau = translation_symplecto(&x, r, r_outer, opts.step)?;
    let tol = opts.tol(1e-6);

    let inside: Vec<Vec<f64>> = (0..20).map(|_| point_in_ball(&mut rng, 2 * n, r)).collect();
    let outside: Vec<Vec<f64>> = (0..20).map(|_| point_in_shell(&mut rng, 2 * n, r_outer + 0.5, r_outer + 1.5)).collect();
    let mut shift: f64 = 0.0;
    for y in &inside {
        let expected: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a + b).collect();
        shift = shift.max(dist(&tau.apply(y)?, &expected));
    }
    let mut identity: f64 = 0.0;
    for y in &outside {
        identity = identity.max(dist(&tau.apply(y)?, y));
    }
    let all: Vec<Vec<f64>> = inside.into_iter().chain(outside).collect();
    let structure = check_structure(&tau, StructureKind::Symplectic, &all, tol)?;
    report.at_most("translation_on_ball", shift, tol);
    report.at_most("identity_outside", identity, 1e-12);
    report.at_most("symplectic_residual", structure.max_residual, tol);
    Ok(report)
}

pub fn translate_cont_cmd(opts: &Options) -> Result<Report> {
    let mut report = Report::new("translate-cont");
    let n = opts.n();
    opts.record(&mut report, n, None);
    let boxes = default_boxes(n);
    let plan = boxes.validate()?;
    report.input("boxes", &boxes);
    let mut rng = opts.rng();
    let d = 2 * n + 1;
    let v: Vec<f64> = boxes.w_half.iter().map(|w| rng.random_range(-0.5 * w..0.5 * w)).collect();
    let x = exp_map(&LieVector::new(v[..n].to_vec(), v[n..2 * n].to_vec(), v[2 * n])?);
    report.input("x", x.to_coords());
    let rho = translation_contacto(&x, &boxes, opts.step)?;
    let tol = opts.tol(1e-6);

    let inside: Vec<Vec<f64>> = (0..20)
        .map(|_| (0..d).map(|_| rng.random_range(-boxes.v_half..boxes.v_half)).collect())
        .collect();
    let mut right: f64 = 0.0;
    for y in &inside {
        let expected = group_mul(&GroupPoint::from_coords(y)?, &x)?.to_coords();
        right = right.max(dist(&rho.apply(y)?, &expected));
    }
    let far = plan.r_outer * 1.1 + 0.5;
    let outside: Vec<Vec<f64>> = (0..20).map(|_| point_in_shell(&mut rng, d, far, far + 1.0)).collect();
    let mut identity: f64 = 0.0;
    for y in &outside {
        identity = identity.max(dist(&rho.apply(y)?, y));
    }
    let all: Vec<Vec<f64>> = inside.into_iter().chain(outside).collect();
    let structure = check_structure(&rho, StructureKind::Contact, &all, tol)?;
    report.at_most("right_translation_on_v", right, tol);
    report.at_most("identity_outside", identity, 1e-12);
    report.at_most("contact_residual", structure.max_residual, tol);
    Ok(report)
}

pub fn rep_unitarity_cmd(opts: &Options) -> Result<Report> {
    let mut report = Report::new("rep-unitarity");
    let (n, res) = (opts.n(), opts.res(97));
    let theta = opts.theta.unwrap_or(1.0);
    opts.record(&mut report, n, Some(res));
    report.input("theta", theta);
    let grid = GridSpec::uniform(2 * n, -1.25, 1.25, res)?;
    let f = match &opts.f {
        Some(src) => {
            report.input("f", src);
            sample_dsl(src, Coords::symplectic(n), &grid)?
        }
        None => {
            report.input("f", "bump(|p - c| / 0.9) * exp(0.5i (x1 - y1))");
            let mut center = vec![0.0; 2 * n];
            center[0] = 0.05;
            center[n] = -0.05;
            radial_bump(&grid, &center, 0.9, |p| 0.5 * (p[0] - p[n]))?
        }
    };
    let mut rng = opts.rng();
    // small enough that f and both translates stay on the grid
    let x1 = point_in_ball(&mut rng, 2 * n, 0.12);
    let x2 = point_in_ball(&mut rng, 2 * n, 0.12);
    report.input("x", [&x1, &x2]);
    let params = RepresentationParams::new(theta);
    let tau1 = Arc::new(translation_symplecto(&x1, 1.0, 4.0, opts.step)?);
    let tau2 = Arc::new(translation_symplecto(&x2, 1.0, 4.0, opts.step)?);
    let tol = opts.tol(5e-3);

    let moved = apply_rep(&params, tau1.as_ref(), &f)?;
    let unitarity = (l2_norm(&moved) - l2_norm(&f)).abs() / l2_norm(&f);
    let twice = apply_rep(&params, tau1.as_ref(), &apply_rep(&params, tau2.as_ref(), &f)?)?;
    let composed = Composition::new(tau1.clone(), tau2)?;
    let once = apply_rep(&params, &composed, &f)?;
    let homomorphism = l2_norm(&twice.sub(&once)?) / l2_norm(&f);
    let mut rn: f64 = 0.0;
    for _ in 0..20 {
        let p = point_in_ball(&mut rng, 2 * n, 3.0);
        rn = rn.max((rn_derivative(tau1.as_ref(), &params, &p)? - 1.0).abs());
    }
    report.at_most("unitarity", unitarity, tol);
    report.at_most("homomorphism", homomorphism, tol);
    report.at_most("rn_derivative", rn, 1e-6);
    Ok(report)
}

pub fn witness_sympl_cmd(opts: &Options) -> Result<Report> {
    let mut report = Report::new("witness-sympl");
    let (n, res) = (opts.n(), opts.res(65));
    opts.record(&mut report, n, Some(res));
    let r = 0.5;
    let grid = GridSpec::uniform(2 * n, -r, r, res)?;
    let config = GeneratorConfig {
        region: Region::Ball { dim: 2 * n, r },
        max_terms: 3,
        max_z_difference: 0,
        min_radius: (3.0 * grid.spacing(0)).max(0.05),
        shift_quantum: 0.0,
    };
    let (f, g) = input_pair(opts, &mut report, Coords::symplectic(n), &grid, config)?;
    let witness = sympl_witness_search(&f, &g, r, opts.step)?;
    report.holds("witness_nonzero", witness.passed);
    report.at_most("crosscheck_rel", witness.diagnostic("crosscheck_rel").unwrap_or(f64::INFINITY), opts.tol(5e-3));
    report.result("witness", &witness);
    Ok(report)
}

pub fn witness_cont_cmd(opts: &Options) -> Result<Report> {
    let mut report = Report::new("witness-cont");
    let (n, res) = (opts.n(), opts.res(33));
    let theta = opts.theta.unwrap_or(0.5);
    opts.record(&mut report, n, Some(res));
    report.input("theta", theta);
    let boxes = default_boxes(n);
    report.input("boxes", &boxes);
    let grid = GridSpec::uniform(2 * n + 1, -boxes.v_half, boxes.v_half, res)?;
    let config = GeneratorConfig {
        region: Region::Cube { dim: 2 * n + 1, half: boxes.v_half },
        max_terms: 2,
        max_z_difference: 1,
        min_radius: 0.08,
        shift_quantum: grid.spacing(2 * n),
    };
    let (f, g) = input_pair(opts, &mut report, Coords::heisenberg(n), &grid, config)?;
    let witness = cont_witness_search(&RepresentationParams::new(theta), &f, &g, &boxes, opts.step)?;
    report.holds("witness_nonzero", witness.passed);
    report.at_most("crosscheck_rel", witness.diagnostic("crosscheck_rel").unwrap_or(f64::INFINITY), opts.tol(2e-2));
    report.result("witness", &witness);
    Ok(report)
}

pub fn shrink_demo_cmd(opts: &Options) -> Result<Report> {
    let mut report = Report::new("shrink-demo");
    let (n, res) = (opts.n(), opts.res(33));
    let theta = opts.theta.unwrap_or(0.0);
    opts.record(&mut report, n, Some(res));
    report.input("theta", theta);
    let v_box = CoordBox::cube(2 * n + 1, 0.5);
    let grid = GridSpec::from_box(&v_box, vec![res; 2 * n + 1])?;
    let f = match &opts.f {
        Some(src) => {
            report.input("f", src);
            sample_dsl(src, Coords::heisenberg(n), &grid)?
        }
        None => {
            report.input("f", "bump(|p - c| / 0.3)");
            let mut center = vec![0.0; 2 * n + 1];
            center[0] = 0.12;
            center[n] = -0.08;
            center[2 * n] = 0.05;
            radial_bump(&grid, &center, 0.3, |_| 0.0)?
        }
    };
    let times = [0.0, 0.5, 1.0, 2.0];
    report.input("times", times);
    let rows = dilation_shrink(&RepresentationParams::new(theta), &f, &v_box, &times, opts.step)?;
    let worst = rows.iter().map(|r| r.rel_diff).fold(0.0, f64::max);
    let decreasing = rows.windows(2).all(|w| w[1].lhs <= w[0].lhs * (1.0 + 1e-12));
    report.at_most("shrink_identity", worst, opts.tol(1e-6));
    report.holds("mass_decreasing", decreasing);
    report.result(
        "rows",
        rows.iter()
            .map(|r| json!({"t": r.t, "lhs": r.lhs, "rhs": r.rhs, "rel_diff": r.rel_diff}))
            .collect::<Vec<_>>(),
    );
    Ok(report)
}

/// Every subcommand at smoke resolution with fixed seeds.
pub fn selftest_cmd(opts: &Options) -> Result<Report> {
    let mut report = Report::new("selftest");
    report.input("seed", opts.seed);
    let smoke = |res: Option<usize>| Options {
        n: Some(1),
        res,
        theta: None,
        step: opts.step,
        tol: None,
        seed: opts.seed,
        f: None,
        g: None,
        contact: false,
    };
    let contact = Options { contact: true, ..smoke(None) };
    let runs: Vec<(&str, Result<Report>)> = vec![
        ("conv-euclid", conv_euclid_cmd(&smoke(Some(17)))),
        ("conv-heis", conv_heis_cmd(&smoke(Some(13)))),
        ("minimal-k", minimal_k_cmd(&smoke(Some(17)))),
        ("certificate", certificate_cmd(&smoke(Some(17)))),
        ("flow-check", flow_check_cmd(&smoke(None))),
        ("flow-check-contact", flow_check_cmd(&contact)),
        ("translate-sympl", translate_sympl_cmd(&smoke(None))),
        ("translate-cont", translate_cont_cmd(&smoke(None))),
        ("rep-unitarity", rep_unitarity_cmd(&smoke(Some(97)))),
        ("witness-sympl", witness_sympl_cmd(&smoke(Some(33)))),
        ("witness-cont", witness_cont_cmd(&smoke(Some(25)))),
        ("shrink-demo", shrink_demo_cmd(&smoke(Some(17)))),
    ];
    for (name, run) in runs {
        match run {
            Ok(sub) => {
                let failed: Vec<&str> = sub.checks.iter().filter(|(_, c)| !c.passed).map(|(k, _)| k.as_str()).collect();
                report.result(name, json!({ "passed": sub.passed(), "failed_checks": failed }));
                report.holds(name, sub.passed());
            }
            Err(e) => {
                report.result(name, json!({ "passed": false, "error": format!("{e:#}") }));
                report.holds(name, false);
            }
        }
    }
    Ok(report)
}
