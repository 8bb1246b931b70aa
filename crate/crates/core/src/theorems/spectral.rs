//! Fourier diagonalization of d/dx and derivative preservation by translation kernels.

use nalgebra::DMatrix;

use super::{max_diff, SuiteConfig, VerificationReport};
use crate::error::{Error, Result};
use crate::grid::{diff_matrix, Grid};
use crate::kernels::{discretize, Kernel};
use crate::matrix::OperatorMatrix;
use crate::operators::{conjugate, intertwining_residual, locality_score};
use crate::scalar::{i_pow, Complex, C};

/// Largest per-axis node count for the tensor-product checks.
pub const MAX_NODES_2D: usize = 24;

pub fn check_fourier_diagonalizes(grid: &Grid<f64>, config: &SuiteConfig) -> Result<VerificationReport> {
    let tol = config.tol("fourier");
    let mut report = VerificationReport::new("fourier");
    report.measure("n", grid.len() as f64);
    if !grid.is_periodic() {
        report.check("periodic_grid", 1.0, 0.0);
        report.note("the Fourier kernel diagonalizes d/dx only on periodic grids");
        return Ok(report);
    }
    let w = discretize(&Kernel::fourier()?, grid)?;
    let ys = w.col_grid().nodes().to_vec();
    for (order, default) in [(1usize, 1e-8), (2, 1e-7)] {
        let label = format!("order{order}");
        let a = diff_matrix(grid, order)?;
        let symbol: Vec<C<f64>> = ys.iter().map(|&y| i_pow::<f64>(order) * y.powi(order as i32)).collect();
        let b = OperatorMatrix::diagonal(&symbol, w.col_grid())?;
        report.check(
            format!("{label}.intertwining"),
            intertwining_residual(&a, &w, &b)?,
            tol.get(&format!("{label}.intertwining"), default),
        );
        let (conj, cond) = conjugate(&a, &w, config.threshold)?;
        let score = locality_score(&conj, 0);
        report.measure(format!("{label}.locality_score"), score);
        report.check(format!("{label}.locality_defect"), 1.0 - score, tol.get(&format!("{label}.locality_defect"), 1e-6));
        let diag_err = symbol
            .iter()
            .enumerate()
            .fold(0.0f64, |acc, (j, s)| acc.max((conj.entries()[(j, j)] - s).norm()));
        report.check(format!("{label}.symbol"), diag_err, tol.get(&format!("{label}.symbol"), 1e-6));
        if report.condition.is_none() {
            report.condition = Some(cond);
        }
    }
    report.note("W is the Nyström matrix of e^{ixy} with columns on the integer wavenumbers");
    Ok(report)
}

/// Band-limited periodic test samples.
fn test_signal(grid: &Grid<f64>, x: f64) -> f64 {
    let k = std::f64::consts::TAU / grid.length();
    let t = x - grid.lo();
    (k * t).sin() + 0.5 * (3.0 * k * t).cos()
}

pub fn check_derivative_preservation(
    kernel: &Kernel<f64>,
    grid: &Grid<f64>,
    nodes_2d: usize,
    config: &SuiteConfig,
) -> Result<VerificationReport> {
    if !kernel.is_translation() {
        return Err(Error::Precondition(format!(
            "kernel `{}` is not of the form f(x − y)",
            kernel.id()
        )));
    }
    if nodes_2d > MAX_NODES_2D {
        return Err(Error::Precondition(format!(
            "2-D checks use at most {MAX_NODES_2D} nodes per axis, got {nodes_2d}"
        )));
    }
    let tol = config.tol("derivative");
    let mut report = VerificationReport::new("derivative");

    let w = discretize(kernel, grid)?;
    let phi: Vec<C<f64>> = grid.sample_complex(|x| Complex::new(test_signal(grid, x), 0.0));
    for order in [1usize, 2] {
        let d = diff_matrix(grid, order)?;
        let lhs = d.apply(&w.apply(&phi)?)?;
        let rhs = w.apply(&d.apply(&phi)?)?;
        let label = format!("order{order}");
        report.check(&label, max_diff(&lhs, &rhs), tol.get(&label, 1e-6));
        let commutator = d.compose(&w)?.max_abs_diff(&w.compose(&d)?)?;
        report.measure(format!("{label}.matrix_commutator"), commutator);
    }

    // tensor-product kernel f(x1 − y1)·f(x2 − y2) on a small 2-D grid
    let g2 = Grid::uniform(grid.lo(), grid.hi(), nodes_2d, grid.is_periodic())?;
    let w1 = discretize(kernel, &g2)?.into_entries();
    let w2 = w1.kronecker(&w1);
    let d = diff_matrix(&g2, 1)?.into_entries();
    let eye = DMatrix::<C<f64>>::identity(nodes_2d, nodes_2d);
    let partials = [("partial_x1", d.kronecker(&eye)), ("partial_x2", eye.kronecker(&d))];
    let nodes = g2.nodes();
    let mut phi2 = Vec::with_capacity(nodes_2d * nodes_2d);
    for &x1 in nodes {
        for &x2 in nodes {
            phi2.push(Complex::new(test_signal(&g2, x1) * test_signal(&g2, 2.0 * x2 - g2.lo()), 0.0));
        }
    }
    let phi2 = nalgebra::DVector::from_vec(phi2);
    for (label, dp) in partials {
        let lhs = &dp * (&w2 * &phi2);
        let rhs = &w2 * (&dp * &phi2);
        let res = lhs.iter().zip(rhs.iter()).fold(0.0f64, |acc, (p, q)| acc.max((p - q).norm()));
        let key = format!("2d.{label}");
        report.check(&key, res, tol.get(&key, 1e-5));
    }
    report.measure("2d.nodes_per_axis", nodes_2d as f64);
    if grid.is_periodic() {
        report.note("translation kernels are periodized over the grid period");
    }
    Ok(report)
}

pub(super) fn fourier_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    let grid = config.grid.resolve(0.0, std::f64::consts::TAU, 32, true)?;
    check_fourier_diagonalizes(&grid, config)
}

pub(super) fn derivative_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    let grid = config.grid.resolve(0.0, std::f64::consts::TAU, 48, true)?;
    let ids: Vec<String> = match &config.kernel {
        Some(id) => vec![id.clone()],
        None => vec!["gaussian".into(), "xgauss".into()],
    };
    let mut report = VerificationReport::new("derivative");
    for id in ids {
        let kernel = Kernel::by_name(&id, None)?;
        report.absorb(&id, check_derivative_preservation(&kernel, &grid, 16, config)?);
    }
    Ok(report)
}
