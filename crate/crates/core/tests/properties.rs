use diffeo_reps::calculus::{conv_euclid, conv_euclid_direct, op_s};
use diffeo_reps::fields::{
    contact_field, flow_jacobian, hamiltonian_field, parse_field, translation_symplecto, Coords, FlowMap,
    ScalarFieldSpec, DEFAULT_STEP,
};
use diffeo_reps::geometry::{
    alpha0, group_inv, group_mul, left_translation_differential, right_translation_differential, GroupPoint,
    TangentVector,
};
use diffeo_reps::representations::{apply_rep, rn_derivative, RepresentationParams};
use diffeo_reps::sampled::{inner_product, integrate, l2_norm, sample, star_euclid, GridSpec, SampledFunction};
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

fn point(n: usize) -> impl Strategy<Value = GroupPoint> {
    (
        prop::collection::vec(-3.0..3.0f64, n),
        prop::collection::vec(-3.0..3.0f64, n),
        -3.0..3.0f64,
    )
        .prop_map(|(x, y, z)| GroupPoint::new(x, y, z).unwrap())
}

fn triple() -> impl Strategy<Value = (GroupPoint, GroupPoint, GroupPoint)> {
    (1usize..=4).prop_flat_map(|n| (point(n), point(n), point(n)))
}

/// Random generator sources over `x1, y1, z`.
fn source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x1".to_string()),
        Just("y1".to_string()),
        Just("z".to_string()),
        (-2.0..2.0f64).prop_map(|c| format!("{c:.3}")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} * {b})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(0.3 * {a})")),
            inner.clone().prop_map(|a| format!("({a})^2")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("({a} / (2 + cos({b})))")),
        ]
    })
}

fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

fn plane_function(grid: &GridSpec, cx: f64, cy: f64, r: f64, phase: f64) -> SampledFunction {
    sample(
        |p| {
            let s = ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt() / r;
            Complex64::from_polar(bump(s), phase * (p[0] - p[1]))
        },
        grid,
        &grid.bbox(),
    )
    .unwrap()
}

fn central_difference(f: &ScalarFieldSpec, p: &[f64], k: usize) -> f64 {
    let h = 1e-5;
    let (mut a, mut b) = (p.to_vec(), p.to_vec());
    a[k] += h;
    b[k] -= h;
    (f.eval(&a) - f.eval(&b)) / (2.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_product_is_associative((u, v, w) in triple()) {
        let a = group_mul(&group_mul(&u, &v).unwrap(), &w).unwrap().to_coords();
        let b = group_mul(&u, &group_mul(&v, &w).unwrap()).unwrap().to_coords();
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).abs() <= 1e-12 * p.abs().max(1.0));
        }
        let e = group_mul(&group_inv(&u), &u).unwrap().to_coords();
        prop_assert!(e.iter().all(|c| c.abs() <= 1e-12));
    }

    #[test]
    fn contact_form_is_right_invariant((p, g, _) in triple(), seed in prop::collection::vec(-1.0..1.0f64, 9)) {
        let d = 2 * p.n() + 1;
        let v = DVector::from_column_slice(&seed[..d]);
        let dr = right_translation_differential(&g);
        let lhs = alpha0(&p, &TangentVector(v.as_slice().to_vec())).unwrap();
        let rhs = alpha0(&group_mul(&p, &g).unwrap(), &TangentVector((&dr * v).as_slice().to_vec())).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10);
        prop_assert!((dr.determinant() - 1.0).abs() <= 1e-12);
        prop_assert!((left_translation_differential(&g).determinant() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn printing_round_trips(src in source()) {
        let coords = Coords::heisenberg(1);
        let f = parse_field(&src, coords).unwrap();
        let again = parse_field(&f.to_source(), coords).unwrap();
        prop_assert_eq!(&f.expr, &again.expr);
    }

    #[test]
    fn symbolic_gradient_matches_differences(src in source(), p in prop::collection::vec(-1.0..1.0f64, 3)) {
        let f = parse_field(&src, Coords::heisenberg(1)).unwrap();
        let grad = f.gradient().unwrap();
        for (k, g) in grad.iter().enumerate() {
            let exact = g.eval(&p);
            let approx = central_difference(&f, &p, k);
            prop_assert!((exact - approx).abs() <= 1e-6 * exact.abs().max(1.0), "d{k}: {exact} vs {approx}");
        }
    }

    #[test]
    fn hamiltonian_field_solves_its_defining_equation(
        src in source(),
        p in prop::collection::vec(-1.0..1.0f64, 2),
        w in prop::collection::vec(-1.0..1.0f64, 2),
    ) {
        // reuse a three-variable source on the plane by pinning z = 0.2
        let spec = parse_field(&src.replace('z', "0.2"), Coords::symplectic(1)).unwrap();
        let x = hamiltonian_field(&spec, 1).unwrap().eval(&p).unwrap();
        let grad = spec.gradient().unwrap();
        let df_w: f64 = (0..2).map(|k| grad[k].eval(&p) * w[k]).sum();
        let omega = x[0] * w[1] - x[1] * w[0];
        prop_assert!((omega - df_w).abs() <= 1e-10 * df_w.abs().max(1.0));
    }

    #[test]
    fn contact_field_solves_its_defining_equations(
        src in source(),
        p in prop::collection::vec(-1.0..1.0f64, 3),
    ) {
        let spec = parse_field(&src, Coords::heisenberg(1)).unwrap();
        let x = contact_field(&spec, 1).unwrap().eval(&p).unwrap();
        let f = spec.eval(&p);
        let grad: Vec<f64> = spec.gradient().unwrap().iter().map(|g| g.eval(&p)).collect();
        let y = p[1];
        let alpha = |v: &[f64]| v[2] - y * v[0];
        let scale = f.abs().max(grad.iter().fold(1.0f64, |m, g| m.max(g.abs())));
        prop_assert!((alpha(&x) - f).abs() <= 1e-10 * scale);
        // X ⌟ dα₀ = df(R)·α₀ − df, tested on the coordinate basis
        for k in 0..3 {
            let mut e = [0.0; 3];
            e[k] = 1.0;
            let lhs = x[0] * e[1] - x[1] * e[0];
            let rhs = grad[2] * alpha(&e) - grad[k];
            prop_assert!((lhs - rhs).abs() <= 1e-10 * scale * (1.0 + y.abs()));
        }
    }

    #[test]
    fn hamiltonian_flows_preserve_volume(
        c in prop::collection::vec(-1.0..1.0f64, 3),
        p in prop::collection::vec(-1.5..1.5f64, 2),
    ) {
        let src = format!("bump(0.5, 2) * ({:.3} * x1 * x1 + {:.3} * sin(y1) + {:.3} * x1 * y1)", c[0], c[1], c[2]);
        let spec = parse_field(&src, Coords::symplectic(1)).unwrap();
        let map = FlowMap::new(hamiltonian_field(&spec, 1).unwrap(), 1.0, DEFAULT_STEP).unwrap();
        let det = flow_jacobian(&map, &p).unwrap().determinant();
        prop_assert!((det - 1.0).abs() <= 1e-6, "det {det}");
    }

    #[test]
    fn cauchy_schwarz_and_support_tracking(
        a in (-0.5..0.5f64, -0.5..0.5f64, 0.2..0.5f64, -3.0..3.0f64),
        b in (-0.5..0.5f64, -0.5..0.5f64, 0.2..0.5f64, -3.0..3.0f64),
    ) {
        let grid = GridSpec::uniform(2, -1.0, 1.0, 33).unwrap();
        let f = plane_function(&grid, a.0, a.1, a.2, a.3);
        let g = plane_function(&grid, b.0, b.1, b.2, b.3);
        let ip = inner_product(&f, &g).unwrap();
        prop_assert!(ip.norm() <= l2_norm(&f) * l2_norm(&g) + 1e-12);
        let own = inner_product(&f, &f).unwrap();
        prop_assert!(own.im.abs() <= 1e-14 && own.re >= 0.0);
        if let Some(exact) = f.exact_support() {
            let s = f.support();
            prop_assert!((0..2).all(|k| s.lo[k] <= exact.lo[k] && exact.hi[k] <= s.hi[k]));
        }
        let back = star_euclid(&star_euclid(&f).unwrap()).unwrap();
        prop_assert!(back.sup_distance(&f).unwrap() <= 1e-12);
    }

    #[test]
    fn euclidean_convolution_paths_agree(
        a in (-0.5..0.5f64, -0.5..0.5f64, 0.2..0.5f64, -3.0..3.0f64),
        b in (-0.5..0.5f64, -0.5..0.5f64, 0.2..0.5f64, -3.0..3.0f64),
    ) {
        let grid = GridSpec::uniform(2, -1.0, 1.0, 17).unwrap();
        let f = plane_function(&grid, a.0, a.1, a.2, a.3);
        let g = plane_function(&grid, b.0, b.1, b.2, b.3);
        let fast = conv_euclid(&f, &g).unwrap();
        let slow = conv_euclid_direct(&f, &g).unwrap();
        prop_assert!(fast.sup_distance(&slow).unwrap() <= 1e-10 * slow.sup_norm().max(1e-300));
        let fubini = integrate(&fast) - integrate(&f) * integrate(&g);
        prop_assert!(fubini.norm() <= 1e-12 * (integrate(&f) * integrate(&g)).norm().max(1e-12));
    }

    #[test]
    fn translations_are_unitary_for_every_theta(
        x in (-0.6..0.6f64, -0.6..0.6f64),
        theta in -4.0..4.0f64,
        p in prop::collection::vec(-3.0..3.0f64, 2),
    ) {
        let grid = GridSpec::uniform(2, -1.75, 1.75, 81).unwrap();
        let f = plane_function(&grid, 0.0, 0.0, 0.8, 1.0);
        let tau = translation_symplecto(&[x.0, x.1], 1.0, 4.0, DEFAULT_STEP).unwrap();
        let params = RepresentationParams::new(theta);
        let moved = apply_rep(&params, &tau, &f).unwrap();
        prop_assert!((l2_norm(&moved) - l2_norm(&f)).abs() <= 5e-3 * l2_norm(&f));
        prop_assert!((rn_derivative(&tau, &params, &p).unwrap() - 1.0).abs() <= 1e-6);
    }
}

#[test]
fn s_is_linear() {
    let grid = GridSpec::uniform(3, -1.0, 1.0, 17).unwrap();
    let f = sample(|p| Complex64::new(bump(p[0]) * bump(p[1]) * bump(p[2] - 0.1), p[2]), &grid, &grid.bbox()).unwrap();
    let g = sample(|p| Complex64::new((p[0] * p[1]).sin(), bump(p[2])), &grid, &grid.bbox()).unwrap();
    let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
    let lhs = op_s(&f.linear_combination(a, &g, b).unwrap()).unwrap();
    let rhs = op_s(&f).unwrap().scale(a).linear_combination(Complex64::new(1.0, 0.0), &op_s(&g).unwrap().scale(b), Complex64::new(1.0, 0.0)).unwrap();
    assert!(lhs.sup_distance(&rhs).unwrap() <= 1e-13);
}
