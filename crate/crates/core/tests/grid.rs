use std::f64::consts::{PI, TAU};

use funcoord::{diff_matrix, inner_product, make_uniform_grid, Complex, Grid, C};
use proptest::prelude::*;

fn band_limited(grid: &Grid<f64>, coeffs: &[(f64, f64)]) -> Vec<f64> {
    grid.sample(|x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| a * ((k + 1) as f64 * x).sin() + b * ((k + 1) as f64 * x).cos())
            .sum()
    })
}

#[test]
fn spectral_first_and_second_derivatives() {
    let g = make_uniform_grid(0.0, TAU, 32, true).unwrap();
    let s = g.sample(f64::sin);
    let d1 = diff_matrix(&g, 1).unwrap().apply_real(&s).unwrap();
    let d2 = diff_matrix(&g, 2).unwrap().apply_real(&s).unwrap();
    for (i, &x) in g.nodes().iter().enumerate() {
        assert!((d1[i].re - x.cos()).abs() < 1e-10);
        assert!((d2[i].re + x.sin()).abs() < 1e-9);
    }
}

#[test]
fn sine_squared_integrates_to_pi() {
    let g = make_uniform_grid(0.0, TAU, 32, true).unwrap();
    let s = g.sample(f64::sin);
    assert!((inner_product(&s, &s, &g).unwrap() - PI).abs() < 1e-10);
    assert!(inner_product(&s, &g.sample(f64::cos), &g).unwrap().abs() < 1e-12);
}

#[test]
fn gaussian_quadrature_error_decays_at_least_quadratically() {
    let exact = PI.sqrt() * statrs::function::erf::erf(6.0);
    let err = |n: usize| {
        let g: Grid<f64> = make_uniform_grid(-6.0, 6.0, n, false).unwrap();
        let f = g.sample(|x| (-x * x).exp());
        (inner_product(&f, &vec![1.0; n], &g).unwrap() - exact).abs()
    };
    let mut prev = err(9);
    for n in [17, 33, 65] {
        let e = err(n);
        assert!(e <= prev / 4.0 + 1e-14, "n = {n}: {e:e} after {prev:e}");
        prev = e;
    }
}

#[test]
fn derivative_of_constant_vanishes_on_both_grid_kinds() {
    for periodic in [true, false] {
        let g: Grid<f64> = make_uniform_grid(-1.0, 2.0, 20, periodic).unwrap();
        for q in 1..=4 {
            let m = diff_matrix(&g, q).unwrap();
            // rounding grows with the matrix entries, which scale like h^{-q}
            let tol = 1e-12 * m.max_abs().max(1.0);
            let d = m.apply_real(&vec![3.5; 20]).unwrap();
            assert!(d.iter().all(|z| z.norm() < tol), "q = {q}, periodic = {periodic}");
        }
    }
}

proptest! {
    #[test]
    fn nodes_increase_and_weights_sum_to_length(
        lo in -50.0f64..50.0,
        len in 0.1f64..100.0,
        n in 8usize..200,
        periodic in any::<bool>(),
    ) {
        let g = make_uniform_grid(lo, lo + len, n, periodic).unwrap();
        prop_assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        let total: f64 = g.weights().iter().sum();
        prop_assert!((total - len).abs() <= 1e-12 * len.max(1.0));
        let h = if periodic { len / n as f64 } else { len / (n - 1) as f64 };
        prop_assert!((g.spacing() - h).abs() <= 1e-12 * h.max(1.0));
    }

    #[test]
    fn undersized_or_empty_grids_are_rejected(n in 0usize..8, lo in -5.0f64..5.0) {
        prop_assert!(make_uniform_grid(lo, lo + 1.0, n, false).is_err());
        prop_assert!(make_uniform_grid(lo, lo, 16, false).is_err());
    }

    #[test]
    fn first_derivative_twice_matches_second(
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6),
    ) {
        let g = make_uniform_grid(0.0, TAU, 32, true).unwrap();
        let s = band_limited(&g, &coeffs);
        let d1 = diff_matrix(&g, 1).unwrap();
        let twice = d1.apply(&d1.apply_real(&s).unwrap()).unwrap();
        let once = diff_matrix(&g, 2).unwrap().apply_real(&s).unwrap();
        for (a, b) in twice.iter().zip(&once) {
            prop_assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn inner_product_is_conjugate_symmetric(
        pairs in prop::collection::vec(((-1.0f64..1.0, -1.0f64..1.0), (-1.0f64..1.0, -1.0f64..1.0)), 12),
    ) {
        let g = make_uniform_grid(0.0, 1.0, 12, false).unwrap();
        let f: Vec<C<f64>> = pairs.iter().map(|((a, b), _)| Complex::new(*a, *b)).collect();
        let h: Vec<C<f64>> = pairs.iter().map(|(_, (a, b))| Complex::new(*a, *b)).collect();
        let fg = inner_product(&f, &h, &g).unwrap();
        let gf = inner_product(&h, &f, &g).unwrap();
        prop_assert!((fg - gf.conj()).norm() < 1e-14);
    }
}
