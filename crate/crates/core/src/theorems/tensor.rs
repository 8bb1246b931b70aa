//! Multiplication operators under conjugation, rank-one tensors, and the
//! transformation law of the squared-derivative nonlinearity.

use nalgebra::DMatrix;
use rand::Rng;

use super::{SuiteConfig, VerificationReport};
use crate::coeff::Coefficient;
use crate::distributions::GeneralizedFunction;
use crate::error::{Error, Result};
use crate::grid::{diff_matrix, Grid};
use crate::kernels::{apply, discretize, Kernel};
use crate::matrix::OperatorMatrix;
use crate::operators::{conjugate, locality_score, physical_bandwidth, to_matrix, LocalOperator};
use crate::scalar::{Complex, C};

/// Band score a non-constant multiplier must stay below under a smoothing kernel.
pub const NONLOCALITY_THRESHOLD: f64 = 0.9;

pub fn check_product_preservation(
    a: &Coefficient<f64>,
    kernel: &Kernel<f64>,
    grid: &Grid<f64>,
    config: &SuiteConfig,
) -> Result<VerificationReport> {
    let tol = config.tol("product");
    let mut report = VerificationReport::new("product");
    let m = to_matrix(&LocalOperator::multiplication(a.clone()), grid)?;
    let w = discretize(kernel, grid)?;
    let (conj, cond) = conjugate(&m, &w, config.threshold)?;
    report.condition = Some(cond);

    let scores: Vec<f64> = (0..=4).map(|b| locality_score(&conj, b)).collect();
    for (b, s) in scores.iter().enumerate() {
        report.measure(format!("score_b{b}"), *s);
    }
    report.measure("physical_bandwidth_b2", physical_bandwidth(grid, 2));
    let drop = scores.windows(2).fold(0.0f64, |acc, w| acc.max(w[0] - w[1]));
    report.check("monotonicity_violation", drop, tol.get("monotonicity_violation", 1e-12));

    let values: Vec<C<f64>> = grid.nodes().iter().map(|&x| a.value(x)).collect();
    let constant = values.iter().all(|v| (v - values[0]).norm() <= 1e-14 * (1.0 + values[0].norm()));
    if constant || kernel.is_diagonal() {
        report.check("trivial_locality_defect", 1.0 - scores[0], tol.get("trivial_locality_defect", 1e-8));
        report.note("trivial case: the conjugated multiplication operator stays diagonal");
    } else {
        let threshold = tol.get("nonlocality_witness", NONLOCALITY_THRESHOLD);
        report.check("nonlocality_witness", scores[2], threshold);
        report.note(format!(
            "non-constant multiplier under `{}`: band-2 score must not exceed the calibrated threshold {threshold}",
            kernel.id()
        ));
    }
    Ok(report)
}

/// `σ₂/σ₁` of `W (a fᵀ) Wᵀ` for random `a`, `f`.
pub fn check_rank_one_preservation<R: Rng>(w: &OperatorMatrix<f64>, rng: &mut R) -> f64 {
    let n = w.entries().ncols();
    let a = DMatrix::from_fn(n, 1, |_, _| Complex::new(rng.gen_range(-1.0..=1.0), 0.0));
    let f = DMatrix::from_fn(n, 1, |_, _| Complex::new(rng.gen_range(-1.0..=1.0), 0.0));
    let h = w.entries() * (&a * f.transpose()) * w.entries().transpose();
    let mut sv: Vec<f64> = h.singular_values().iter().copied().collect();
    sv.sort_by(|p, q| q.total_cmp(p));
    if sv[0] == 0.0 {
        0.0
    } else {
        sv[1] / sv[0]
    }
}

/// Compares `(dφ/dx)²` for `φ = ω φ̃` against the double quadrature
/// `Σ_{j,l} ∂xω(x, u_j)·∂xω(x, v_l)·w_j·w_l·φ̃_j·φ̃_l`.
pub fn check_nonlinear_tensor(
    kernel: &Kernel<f64>,
    phi_tilde: &[f64],
    grid: &Grid<f64>,
    tolerance: f64,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("nonlinear");
    let u = GeneralizedFunction::smooth(grid, phi_tilde.to_vec())?;
    let phi = apply(kernel, &u)?;
    let d = diff_matrix(grid, 1)?;
    let lhs: Vec<C<f64>> = d.apply(&phi)?.into_iter().map(|z| z * z).collect();

    let n = grid.len();
    let kx = match kernel.diagonal_coefficient() {
        Some(a0) => {
            let diag: Vec<C<f64>> = grid.nodes().iter().map(|&x| a0.value(x)).collect();
            d.compose(&OperatorMatrix::diagonal(&diag, grid)?)?.into_entries()
        }
        None => {
            let period = grid.is_periodic().then(|| grid.length());
            let mut m = DMatrix::from_element(n, n, Complex::new(0.0, 0.0));
            for (i, &x) in grid.nodes().iter().enumerate() {
                for (j, (&y, &w)) in grid.nodes().iter().zip(grid.weights()).enumerate() {
                    m[(i, j)] = kernel.partial_periodic(period, x, y, 1, 0).map_err(|e| match e {
                        Error::UnsupportedOrder { .. } => Error::Unsupported(format!(
                            "kernel `{}` has no ∂ω/∂x and finite differences are disabled",
                            kernel.id()
                        )),
                        other => other,
                    })? * w;
                }
            }
            m
        }
    };
    let mut residual = 0.0f64;
    for i in 0..n {
        let mut rhs = Complex::new(0.0, 0.0);
        for j in 0..n {
            let left = kx[(i, j)] * phi_tilde[j];
            for l in 0..n {
                rhs += left * kx[(i, l)] * phi_tilde[l];
            }
        }
        residual = residual.max((lhs[i] - rhs).norm());
    }
    report.check("residual", residual, tolerance);
    report.measure("lhs_max", lhs.iter().fold(0.0f64, |a, z| a.max(z.norm())));
    Ok(report)
}

pub(super) fn product_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    let grid = config.grid.resolve(-6.0, 6.0, 64, false)?;
    let gaussian = Kernel::gaussian()?;
    let x = Coefficient::monomial(1);
    let mut report = VerificationReport::new("product");
    report.absorb(
        "constant_gaussian",
        check_product_preservation(&Coefficient::real_constant(1.0), &gaussian, &grid, config)?,
    );
    let x2p1 = Coefficient::real("x^2+1", |t: f64| t * t + 1.0);
    report.absorb(
        "x_multiplication",
        check_product_preservation(&x, &Kernel::multiplication(x2p1), &grid, config)?,
    );
    report.absorb("x_gaussian", check_product_preservation(&x, &gaussian, &grid, config)?);
    Ok(report)
}

pub(super) fn nonlinear_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    let tol = config.tol("nonlinear");
    let mut report = VerificationReport::new("nonlinear");
    let circle = Grid::uniform(0.0, std::f64::consts::TAU, 32, true)?;
    let identity = Kernel::identity();
    report.absorb(
        "zero",
        check_nonlinear_tensor(&identity, &vec![0.0; 32], &circle, tol.get("zero.residual", 0.0))?,
    );
    report.absorb(
        "identity",
        check_nonlinear_tensor(&identity, &circle.sample(f64::sin), &circle, tol.get("identity.residual", 1e-9))?,
    );

    let grid = config.grid.resolve(-6.0, 6.0, 64, true)?;
    let kernel = match &config.kernel {
        Some(id) => Kernel::by_name(id, None)?,
        None => Kernel::gaussian()?,
    };
    report.absorb(
        "gaussian",
        check_nonlinear_tensor(&kernel, &grid.sample(f64::sin), &grid, tol.get("gaussian.residual", 1e-5))?,
    );

    let mut rng = config.rng("nonlinear");
    let w = discretize(&Kernel::gaussian()?, &grid)?;
    report.check("rank1_gaussian", check_rank_one_preservation(&w, &mut rng), tol.get("rank1_gaussian", 1e-8));
    let n = grid.len();
    let random = DMatrix::from_fn(n, n, |i, j| {
        let noise: f64 = rng.gen_range(-1.0..=1.0);
        Complex::new(if i == j { 2.0 } else { 0.0 } + noise / (n as f64).sqrt(), 0.0)
    });
    let w = OperatorMatrix::on_grid(random, &grid);
    report.check("rank1_random", check_rank_one_preservation(&w, &mut rng), tol.get("rank1_random", 1e-8));
    report.note("rank1 values are σ₂/σ₁ of W·(a fᵀ)·Wᵀ");
    Ok(report)
}
