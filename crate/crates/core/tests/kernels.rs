use std::f64::consts::{PI, TAU};

use funcoord::{
    apply, diff_matrix, discretize, invert, kernel_pde_residual, make_uniform_grid, riccati_kernel,
    Coefficient, Complex, Error, GeneralizedFunction, Grid, Jump, Kernel, OperatorMatrix,
    ResidualDomain, SingularTerm, C,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use statrs::function::erf::erf;

fn line(n: usize) -> Grid<f64> {
    make_uniform_grid(-6.0, 6.0, n, false).unwrap()
}

fn one() -> Coefficient<f64> {
    Coefficient::real_constant(1.0)
}

#[test]
fn gaussian_rows_sum_to_root_pi() {
    let g = line(64);
    let m = discretize(&Kernel::gaussian().unwrap(), &g).unwrap();
    // rows near the ends lose the tail beyond ±6; the middle ones do not
    for i in 20..44 {
        let s: C<f64> = m.entries().row(i).iter().sum();
        assert!((s.re - PI.sqrt()).abs() < 1e-6, "row {i}: {}", s.re);
    }
}

#[test]
fn multiplication_kernel_is_unweighted_diagonal() {
    let g = line(16);
    let k = Kernel::multiplication(Coefficient::real("1+x^2", |x: f64| 1.0 + x * x));
    let m = discretize(&k, &g).unwrap();
    for i in 0..16 {
        for j in 0..16 {
            let want = if i == j { 1.0 + g.nodes()[i].powi(2) } else { 0.0 };
            assert_eq!(m.entries()[(i, j)], Complex::new(want, 0.0));
        }
    }
}

#[test]
fn gaussian_matrix_is_symmetric_once_unweighted() {
    let g = line(33);
    let m = discretize(&Kernel::gaussian().unwrap(), &g).unwrap();
    let w = g.weights();
    for i in 0..33 {
        for j in 0..33 {
            let a = m.entries()[(i, j)] / w[j];
            let b = m.entries()[(j, i)] / w[i];
            assert!((a - b).norm() < 1e-15);
        }
    }
}

#[test]
fn gaussian_sifts_delta_and_its_derivative() {
    let g = line(121);
    let k = Kernel::gaussian().unwrap();
    let x0 = 0.7;
    let d = GeneralizedFunction::delta(&g, x0, 0, 1.0).unwrap();
    for (v, &x) in apply(&k, &d).unwrap().iter().zip(g.nodes()) {
        assert!((v.re - (-(x - x0).powi(2)).exp()).abs() < 1e-12);
    }
    let d1 = GeneralizedFunction::delta(&g, 0.0, 1, 1.0).unwrap();
    for (v, &x) in apply(&k, &d1).unwrap().iter().zip(g.nodes()) {
        assert!((v.re + 2.0 * x * (-x * x).exp()).abs() < 1e-10);
    }
}

#[test]
fn gaussian_smooths_heaviside_into_error_function() {
    let g = line(121);
    let h = GeneralizedFunction::heaviside(&g, 0.0, 1.0).unwrap();
    let out = apply(&Kernel::gaussian().unwrap(), &h).unwrap();
    let half = PI.sqrt() / 2.0;
    for (v, &x) in out.iter().zip(g.nodes()) {
        // the step is cut off at the right end of the grid
        let truncated = half * (erf(x) + erf(6.0 - x));
        assert!((v.re - truncated).abs() < 1e-7, "x = {x}");
        if x.abs() <= 2.0 {
            assert!((v.re - half * (1.0 + erf(x))).abs() < 1e-7, "x = {x}");
        }
    }
}

#[test]
fn inversion_examples() {
    let g: Grid<f64> = make_uniform_grid(0.0, 1.0, 8, false).unwrap();
    let (inv, report) = invert(&OperatorMatrix::identity(&g), 1e-10).unwrap();
    assert!(inv.max_abs_diff(&OperatorMatrix::identity(&g)).unwrap() < 1e-15);
    assert_eq!(report.truncated, 0);
    assert_eq!(report.rank, 8);

    // grids hold at least 8 nodes, so diag(2, 4) is repeated along the diagonal
    let diag: Vec<C<f64>> = (0..8).map(|i| Complex::new(if i % 2 == 0 { 2.0 } else { 4.0 }, 0.0)).collect();
    let (inv, _) = invert(&OperatorMatrix::diagonal(&diag, &g).unwrap(), 1e-10).unwrap();
    for i in 0..8 {
        let want = if i % 2 == 0 { 0.5 } else { 0.25 };
        assert!((inv.entries()[(i, i)].re - want).abs() < 1e-15);
    }

    let circle = make_uniform_grid(0.0, TAU, 32, true).unwrap();
    let w = discretize(&Kernel::fourier().unwrap(), &circle).unwrap();
    let (inv, report) = invert(&w, 1e-10).unwrap();
    let eye = DMatrix::<C<f64>>::identity(32, 32);
    let err = (inv.entries() * w.entries() - eye).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    assert!(err < 1e-8, "{err:e}");
    assert!(report.condition_number() < 1.0 + 1e-10);
}

#[test]
fn zero_matrix_has_no_inverse() {
    let g: Grid<f64> = make_uniform_grid(0.0, 1.0, 8, false).unwrap();
    let z = OperatorMatrix::identity(&g).scale(Complex::new(0.0, 0.0));
    assert!(matches!(invert(&z, 1e-10), Err(Error::SingularTransform)));
    assert!(invert(&OperatorMatrix::identity(&g), 1.0).is_err());
}

#[test]
fn translation_kernels_solve_the_derivative_equation() {
    let g = line(25);
    let dom = ResidualDomain::square(&g);
    for k in [Kernel::gaussian().unwrap(), Kernel::xgauss().unwrap()] {
        let r = kernel_pde_residual(&k, 1, 1, &one(), &one(), &dom).unwrap();
        assert!(r.max_norm < 1e-10, "{}: {:e}", k.id(), r.max_norm);
    }
}

#[test]
fn fourier_kernel_turns_derivative_into_multiplication() {
    let circle = make_uniform_grid(0.0, TAU, 32, true).unwrap();
    let ys: Vec<f64> = (-16..16).map(f64::from).collect();
    let dom = ResidualDomain::new(circle.nodes().to_vec(), ys).unwrap();
    let b = Coefficient::new("-iy", |y: f64| Complex::new(0.0, -y));
    let r = kernel_pde_residual(&Kernel::fourier().unwrap(), 1, 0, &one(), &b, &dom).unwrap();
    assert!(r.max_norm < 1e-10, "{:e}", r.max_norm);
}

#[test]
fn exp_exp_signs_differ_on_the_unit_rectangle() {
    let xs = make_uniform_grid(0.0, 1.0, 21, false).unwrap();
    let ys = make_uniform_grid(-1.0, 1.0, 21, false).unwrap();
    let dom = ResidualDomain::from_grids(&xs, &ys);
    let a = Coefficient::real("x", |x: f64| x);
    let minus = kernel_pde_residual(&Kernel::exp_exp(-1).unwrap(), 1, 1, &a, &one(), &dom).unwrap();
    assert!(minus.max_norm < 1e-10, "{:e}", minus.max_norm);
    // the other sign leaves 2x·e^y·ω behind
    let plus = kernel_pde_residual(&Kernel::exp_exp(1).unwrap(), 1, 1, &a, &one(), &dom).unwrap();
    for (x, y, v) in plus.triples() {
        let want = 2.0 * x * y.exp() * (x * y.exp()).exp();
        assert!((v.norm() - want).abs() < 1e-8 * want.max(1.0), "({x}, {y})");
    }
}

#[test]
fn riccati_examples() {
    let g = make_uniform_grid(0.0, 1.0, 41, false).unwrap();
    let dom = ResidualDomain::square(&g);
    let y2 = Coefficient::real("y^2", |y: f64| y * y);
    let y = Coefficient::real("y", |y: f64| y);
    let k = riccati_kernel(&one(), &y2, &y, &g).unwrap();
    let r = kernel_pde_residual(&k, 2, 0, &one(), &y2, &dom).unwrap();
    assert!(r.max_norm < 1e-6, "{:e}", r.max_norm);
    for &x in g.nodes() {
        for &yv in g.nodes() {
            assert!((k.eval(x, yv).unwrap().re - (x * yv).exp()).abs() < 1e-10);
        }
    }

    let zero = Coefficient::real_constant(0.0);
    let flat = riccati_kernel(&one(), &zero, &zero, &g).unwrap();
    for &x in g.nodes() {
        assert!((flat.eval(x, 0.3).unwrap() - Complex::new(1.0, 0.0)).norm() < 1e-14);
    }

    let fixed = riccati_kernel(&one(), &one(), &one(), &g).unwrap();
    let r = kernel_pde_residual(&fixed, 2, 0, &one(), &one(), &dom).unwrap();
    assert!(r.max_norm < 1e-8, "{:e}", r.max_norm);
}

#[test]
fn riccati_blow_up_is_reported() {
    let g = make_uniform_grid(0.0, 3.0, 61, false).unwrap();
    let minus_one = Coefficient::real_constant(-1.0);
    // g' = −1 − g² from g = 0 is −tan(x), which blows up at π/2
    let err = riccati_kernel(&one(), &minus_one, &Coefficient::real_constant(0.0), &g).unwrap_err();
    assert!(matches!(err, Error::RiccatiSingularity { .. }), "{err}");
}

#[test]
fn dilation_inverts_to_reciprocal_dilation() {
    let g = line(16);
    for c in [0.5, 2.0, -3.0] {
        let (inv, _) = invert(&discretize(&Kernel::dilation(c), &g).unwrap(), 1e-10).unwrap();
        let want = discretize(&Kernel::dilation(1.0 / c), &g).unwrap();
        for i in 0..16 {
            assert_eq!(inv.entries()[(i, i)], want.entries()[(i, i)]);
        }
    }
}

fn band_limited(g: &Grid<f64>, coeffs: &[(f64, f64)]) -> Vec<f64> {
    g.sample(|x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| a * ((k + 1) as f64 * x).sin() + b * ((k + 1) as f64 * x).cos())
            .sum()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn apply_is_linear(
        alpha in -2.0f64..2.0,
        beta in -2.0f64..2.0,
        x0 in -3.0f64..3.0,
        x1 in -3.0f64..3.0,
        q in 0usize..3,
        width in 0.5f64..2.0,
    ) {
        let g = line(61);
        let k = Kernel::gaussian().unwrap();
        let f = GeneralizedFunction::from_regular(
            g.clone(),
            Some(g.sample(|x| (-(x / width).powi(2)).exp())),
            vec![Jump::new(x1, 1.0, 0)],
            vec![],
        )
        .unwrap();
        let h = GeneralizedFunction::from_regular(g.clone(), None, vec![], vec![SingularTerm::new(x0, q, 0.7)]).unwrap();
        let lhs = apply(&k, &f.scale(alpha).add(&h.scale(beta)).unwrap()).unwrap();
        let (af, ah) = (apply(&k, &f).unwrap(), apply(&k, &h).unwrap());
        for i in 0..g.len() {
            let rhs = af[i] * alpha + ah[i] * beta;
            prop_assert!((lhs[i] - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn translation_kernels_commute_with_differentiation(
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6),
        q in 1usize..3,
        xgauss in any::<bool>(),
    ) {
        let g = make_uniform_grid(0.0, TAU, 32, true).unwrap();
        let k = if xgauss { Kernel::xgauss() } else { Kernel::gaussian() }.unwrap();
        let m = discretize(&k, &g).unwrap();
        let d = diff_matrix(&g, q).unwrap();
        let gap = m.compose(&d).unwrap().max_abs_diff(&d.compose(&m).unwrap()).unwrap();
        prop_assert!(gap < 1e-6, "matrix gap {:e}", gap);
        let u = band_limited(&g, &coeffs);
        let lhs = m.apply(&d.apply_real(&u).unwrap()).unwrap();
        let rhs = d.apply(&m.apply_real(&u).unwrap()).unwrap();
        for (a, b) in lhs.iter().zip(&rhs) {
            prop_assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn translation_residual_vanishes_for_any_profile(s in 0.3f64..3.0, c in -1.0f64..1.0) {
        let g = line(17);
        let k = Kernel::translation_family(
            "scaled",
            move |t: f64, k| match k {
                0 => Some((-(t / s).powi(2)).exp() + c * t),
                1 => Some(-2.0 * t / (s * s) * (-(t / s).powi(2)).exp() + c),
                _ => None,
            },
            10.0,
            funcoord::Rect::square(-6.0, 6.0),
        )
        .unwrap();
        let r = kernel_pde_residual(&k, 1, 1, &one(), &one(), &ResidualDomain::square(&g)).unwrap();
        prop_assert!(r.max_norm < 1e-8, "{:e}", r.max_norm);
    }
}
