use diffeo_reps::calculus::conv_heis;
use diffeo_reps::geometry::CoordBox;
use diffeo_reps::sampled::{sample, GridSpec, SampledFunction};
use num_complex::Complex64;

fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// Trapezoid weight of node `i` on an axis with `count` nodes.
fn trapezoid(i: usize, count: usize, h: f64) -> f64 {
    if i == 0 || i + 1 == count {
        h / 2.0
    } else {
        h
    }
}

/// Direct double sum: for every output node u, Σ_v w(v) f(v) g(v⁻¹u).
fn direct(f: &SampledFunction, g: &SampledFunction, out: &GridSpec) -> Vec<Complex64> {
    let fg = f.grid();
    let s = f.support();
    let h = fg.spacings();
    let mut values = Vec::with_capacity(out.len());
    out.full_index_box().for_each(|o| {
        let u = out.point(o);
        let mut acc = Complex64::new(0.0, 0.0);
        s.for_each(|vi| {
            let v = fg.point(vi);
            let fv = f.at(vi);
            if fv.norm() == 0.0 {
                return;
            }
            let wt: f64 = (0..3).map(|a| trapezoid(vi[a], fg.counts[a], h[a])).product();
            let p = [u[0] - v[0], u[1] - v[1], u[2] - v[2] - v[0] * (u[1] - v[1])];
            acc += fv * g.interpolate(&p) * wt;
        });
        values.push(acc);
    });
    values
}

fn inputs(count: usize) -> (SampledFunction, SampledFunction) {
    let grid = GridSpec::uniform(3, -1.0, 1.0, count).unwrap();
    let f = sample(
        |p| Complex64::new(bump(p[0] / 0.8) * bump(p[1] / 0.7) * bump((p[2] - 0.1) / 0.6), p[0] * bump(p[1]) * bump(p[2])),
        &grid,
        &CoordBox::new(vec![-0.8, -0.9, -0.7], vec![0.9, 0.7, 0.8]).unwrap(),
    )
    .unwrap();
    let g = sample(
        |p| Complex64::new((p[0] - p[2]).cos() * bump(p[1] / 0.9), bump(p[0]) * p[2] * bump(p[1])),
        &grid,
        &CoordBox::new(vec![-1.0, -0.9, -1.0], vec![0.6, 0.9, 1.0]).unwrap(),
    )
    .unwrap();
    (f, g)
}

#[test]
fn fast_heisenberg_convolution_matches_direct_quadrature() {
    let (f, g) = inputs(17);
    let fast = conv_heis(&f, &g).unwrap();
    let reference = direct(&f, &g, fast.grid());
    let scale = reference.iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(scale > 1e-3);
    let err = fast
        .values()
        .iter()
        .zip(&reference)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(err <= 1e-10 * scale.max(1.0), "err {err} scale {scale}");
}

#[test]
fn output_grid_covers_the_product_support() {
    let (f, g) = inputs(13);
    let out = conv_heis(&f, &g).unwrap();
    let product = diffeo_reps::geometry::heisenberg_product_box(&f.support_box(), &g.support_box());
    let b = out.grid().bbox();
    let h = out.grid().spacings();
    for a in 0..3 {
        assert!(b.lo[a] <= product.lo[a] + 1e-12, "axis {a}");
        assert!(b.hi[a] >= product.hi[a] - h[a] - 1e-12, "axis {a}");
    }
}
