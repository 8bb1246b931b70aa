use std::f64::consts::TAU;

use funcoord::{
    conjugate, diff_matrix, discretize, eigenvalues, locality_score, make_uniform_grid,
    spectrum_distance, to_matrix, transform_metric, Coefficient, Complex, Error, Grid, Kernel,
    LocalOperator, Metric, OperatorMatrix, C,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn circle(n: usize) -> Grid<f64> {
    make_uniform_grid(0.0, TAU, n, true).unwrap()
}

fn c(v: f64) -> C<f64> {
    Complex::new(v, 0.0)
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C<f64>> {
    DMatrix::from_fn(n, n, |_, _| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// `I + R/(2√n)`: singular values stay within a factor of about 3 of one.
fn well_conditioned(rng: &mut ChaCha8Rng, g: &Grid<f64>) -> OperatorMatrix<f64> {
    let n = g.len();
    let r = random_matrix(rng, n) * c(0.5 / (n as f64).sqrt());
    OperatorMatrix::on_grid(DMatrix::identity(n, n) + r, g)
}

#[test]
fn multiplication_operator_is_diagonal() {
    let g = circle(16);
    let op = LocalOperator::multiplication(Coefficient::real("cos", f64::cos));
    let m = to_matrix(&op, &g).unwrap();
    for i in 0..16 {
        for j in 0..16 {
            let want = if i == j { g.nodes()[i].cos() } else { 0.0 };
            assert_eq!(m.entries()[(i, j)], c(want));
        }
    }
}

#[test]
fn first_order_operators_on_sine() {
    let g = circle(32);
    let s = g.sample(f64::sin);
    let d = to_matrix(&LocalOperator::derivative(1).unwrap(), &g).unwrap().apply_real(&s).unwrap();
    let x_dx = LocalOperator::new(vec![(1, Coefficient::real("x", |x: f64| x))]).unwrap();
    let xd = to_matrix(&x_dx, &g).unwrap().apply_real(&s).unwrap();
    for (i, &x) in g.nodes().iter().enumerate() {
        assert!((d[i] - c(x.cos())).norm() < 1e-10);
        assert!((xd[i] - c(x * x.cos())).norm() < 1e-9);
    }
}

#[test]
fn operator_construction_is_validated() {
    let one = || Coefficient::<f64>::real_constant(1.0);
    assert!(LocalOperator::new(vec![(1, one()), (1, one())]).is_err());
    assert!(matches!(LocalOperator::<f64>::derivative(5), Err(Error::UnsupportedOrder { .. })));
}

#[test]
fn conjugating_by_identity_changes_nothing() {
    let g = circle(16);
    let a = diff_matrix(&g, 1).unwrap();
    let (b, report) = conjugate(&a, &OperatorMatrix::identity(&g), 1e-10).unwrap();
    assert!(b.max_abs_diff(&a).unwrap() < 1e-14);
    assert_eq!(report.truncated, 0);
}

#[test]
fn fourier_conjugation_diagonalizes_the_derivative() {
    let g = circle(32);
    let w = discretize(&Kernel::fourier().unwrap(), &g).unwrap();
    let (b, _) = conjugate(&diff_matrix(&g, 1).unwrap(), &w, 1e-10).unwrap();
    let ys = w.col_grid().nodes();
    let mut off = 0.0f64;
    for i in 0..32 {
        for j in 0..32 {
            if i == j {
                assert!((b.entries()[(j, j)] - Complex::new(0.0, ys[j])).norm() < 1e-6, "mode {}", ys[j]);
            } else {
                off = off.max(b.entries()[(i, j)].norm());
            }
        }
    }
    assert!(off < 1e-6, "{off:e}");
}

#[test]
fn gaussian_conjugation_preserves_the_derivative() {
    let g = circle(32);
    let a = diff_matrix(&g, 1).unwrap();
    let w = discretize(&Kernel::gaussian().unwrap(), &g).unwrap();
    let (b, _) = conjugate(&a, &w, 1e-10).unwrap();
    let err = b.max_abs_diff(&a).unwrap();
    assert!(err < 1e-6, "{err:e}");
}

#[test]
fn metric_examples() {
    let g = circle(8);
    // a unitary transform leaves the identity metric alone
    let w = discretize(&Kernel::fourier().unwrap(), &g).unwrap();
    let unitary = w.scale(c(1.0 / w.entries().column(0).norm()));
    let id = transform_metric(&Metric::identity(&g), &unitary).unwrap();
    assert!(id.matrix().max_abs_diff(&OperatorMatrix::identity(&g)).unwrap() < 1e-12);

    let cc = -1.5;
    let d = discretize(&Kernel::dilation(cc), &g).unwrap();
    let scaled = transform_metric(&Metric::identity(&g), &d).unwrap();
    let want = OperatorMatrix::identity(&g).scale(c(cc * cc));
    assert!(scaled.matrix().max_abs_diff(&want).unwrap() < 1e-14);

    let zero = OperatorMatrix::identity(&g).scale(c(0.0));
    assert!(matches!(transform_metric(&Metric::identity(&g), &zero), Err(Error::MetricDegenerate { .. })));
}

#[test]
fn transformed_metric_preserves_inner_products() {
    let g = circle(12);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let r = random_matrix(&mut rng, 12);
        let gm = Metric::new(OperatorMatrix::on_grid(&r * r.adjoint() + DMatrix::identity(12, 12), &g)).unwrap();
        let w = well_conditioned(&mut rng, &g);
        let gt = transform_metric(&gm, &w).unwrap();
        let pt: Vec<C<f64>> = (0..12).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let qt: Vec<C<f64>> = (0..12).map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let (p, q) = (w.apply(&pt).unwrap(), w.apply(&qt).unwrap());
        let err = (gt.inner(&pt, &qt).unwrap() - gm.inner(&p, &q).unwrap()).norm();
        assert!(err < 1e-8, "{err:e}");
    }
}

#[test]
fn metric_rejects_non_hermitian_or_indefinite_input() {
    let g = circle(8);
    let mut m = DMatrix::<C<f64>>::identity(8, 8);
    m[(0, 1)] = c(0.5);
    assert!(Metric::new(OperatorMatrix::on_grid(m, &g)).is_err());
    let neg = OperatorMatrix::identity(&g).scale(c(-1.0));
    assert!(matches!(Metric::new(neg), Err(Error::MetricDegenerate { .. })));
}

#[test]
fn locality_examples() {
    let g: Grid<f64> = make_uniform_grid(0.0, 1.0, 8, false).unwrap();
    let diag: Vec<C<f64>> = (1..=8).map(|v| c(v as f64)).collect();
    assert_eq!(locality_score(&OperatorMatrix::diagonal(&diag, &g).unwrap(), 0), 1.0);

    // 4×4 ones embedded in the top-left corner of an 8-node grid
    let mut ones = DMatrix::<C<f64>>::zeros(8, 8);
    ones.view_mut((0, 0), (4, 4)).fill(c(1.0));
    assert!((locality_score(&OperatorMatrix::on_grid(ones, &g), 0) - 0.25).abs() < 1e-15);

    let tri = DMatrix::from_fn(8, 8, |i, j| if i.abs_diff(j) <= 1 { c(1.0 + i as f64) } else { c(0.0) });
    assert_eq!(locality_score(&OperatorMatrix::on_grid(tri, &g), 1), 1.0);
}

#[test]
fn periodic_bandwidth_wraps_around() {
    let g = circle(8);
    let d = diff_matrix(&make_uniform_grid(0.0, 1.0, 8, false).unwrap(), 1).unwrap();
    let mut m = DMatrix::<C<f64>>::zeros(8, 8);
    m[(0, 7)] = c(1.0);
    m[(7, 0)] = c(1.0);
    assert_eq!(locality_score(&OperatorMatrix::on_grid(m, &g), 1), 1.0);
    assert!(locality_score(&d, 1) < 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conjugation_is_functorial(seed in any::<u64>()) {
        let g = circle(10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = OperatorMatrix::on_grid(random_matrix(&mut rng, 10), &g);
        let (w1, w2) = (well_conditioned(&mut rng, &g), well_conditioned(&mut rng, &g));
        let (step, _) = conjugate(&a, &w1, 1e-10).unwrap();
        let (twice, _) = conjugate(&step, &w2, 1e-10).unwrap();
        let (once, _) = conjugate(&a, &w1.compose(&w2).unwrap(), 1e-10).unwrap();
        prop_assert!(twice.max_abs_diff(&once).unwrap() < 1e-6);
    }

    #[test]
    fn conjugation_preserves_the_spectrum(seed in any::<u64>()) {
        let g = circle(10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Hermitian, so the eigenvalues are well conditioned
        let r = random_matrix(&mut rng, 10);
        let a = OperatorMatrix::on_grid(&r + r.adjoint(), &g);
        let w = well_conditioned(&mut rng, &g);
        let (b, _) = conjugate(&a, &w, 1e-10).unwrap();
        let d = spectrum_distance(&eigenvalues(&a).unwrap(), &eigenvalues(&b).unwrap()).unwrap();
        prop_assert!(d < 1e-6, "{:e}", d);
    }

    #[test]
    fn multiplication_conjugation_keeps_locality(
        shift in 0.5f64..3.0,
        amp in 0.0f64..0.45,
        q in 1usize..4,
    ) {
        // entries are rescaled by a0(x_j)/a0(x_i), so the sparsity pattern survives
        let g = make_uniform_grid(0.0, TAU, 24, false).unwrap();
        let a0 = Coefficient::real("a0", move |x: f64| shift * (1.0 + amp * x.sin()));
        let w = discretize(&Kernel::multiplication(a0), &g).unwrap();
        let a = diff_matrix(&g, q).unwrap();
        let (b, _) = conjugate(&a, &w, 1e-10).unwrap();
        let reach = (0..24)
            .flat_map(|i| (0..24).map(move |j| (i, j)))
            .filter(|&(i, j)| a.entries()[(i, j)].norm() > 0.0)
            .map(|(i, j)| i.abs_diff(j))
            .max()
            .unwrap();
        prop_assert!((locality_score(&b, reach) - 1.0).abs() < 1e-10);
        for band in 0..reach {
            let (sa, sb) = (locality_score(&a, band), locality_score(&b, band));
            prop_assert!(sa < 1.0 && sb < 1.0);
        }
        let m = to_matrix(&LocalOperator::multiplication(Coefficient::real("x", |x: f64| x)), &g).unwrap();
        let (mb, _) = conjugate(&m, &w, 1e-10).unwrap();
        prop_assert!((locality_score(&mb, 0) - locality_score(&m, 0)).abs() < 1e-10);
    }

    #[test]
    fn metric_pulled_back_through_pseudo_inverse_returns(seed in any::<u64>()) {
        let g = circle(10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = random_matrix(&mut rng, 10);
        let gm = Metric::new(OperatorMatrix::on_grid(&r * r.adjoint() + DMatrix::identity(10, 10), &g)).unwrap();
        let w = well_conditioned(&mut rng, &g);
        let (pinv, _) = funcoord::invert(&w, 1e-10).unwrap();
        let back = transform_metric(&transform_metric(&gm, &w).unwrap(), &pinv).unwrap();
        prop_assert!(back.matrix().max_abs_diff(gm.matrix()).unwrap() < 1e-8);
    }
}
