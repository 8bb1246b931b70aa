//! Coherence of a change of coordinates: inner products move with the metric
//! and spectra survive conjugation.

use nalgebra::DMatrix;
use rand::Rng;

use super::{SuiteConfig, VerificationReport};
use crate::error::Result;
use crate::matrix::OperatorMatrix;
use crate::operators::{conjugate, eigenvalues, spectrum_distance, transform_metric, Metric};
use crate::scalar::{Complex, C};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceOptions {
    pub inner_tolerance: f64,
    pub spectrum_tolerance: f64,
    pub threshold: f64,
}

impl Default for CoherenceOptions {
    fn default() -> Self {
        Self { inner_tolerance: 1e-8, spectrum_tolerance: 1e-6, threshold: crate::kernels::DEFAULT_THRESHOLD }
    }
}

/// Compares `⟨Wφ, Wψ⟩_G` with `⟨φ, ψ⟩_{WᴴGW}` (relative) and the spectra of
/// `A` and `W⁻¹AW`.
pub fn check_transformation_coherence(
    g: &Metric<f64>,
    w: &OperatorMatrix<f64>,
    a: &OperatorMatrix<f64>,
    phi: &[C<f64>],
    psi: &[C<f64>],
    options: &CoherenceOptions,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new("coherence");
    let pulled = transform_metric(g, w)?;
    let lhs = g.inner(&w.apply(phi)?, &w.apply(psi)?)?;
    let rhs = pulled.inner(phi, psi)?;
    report.check("inner_product", (lhs - rhs).norm() / lhs.norm().max(1.0), options.inner_tolerance);

    let (conj, cond) = conjugate(a, w, options.threshold)?;
    let before = eigenvalues(a)?;
    let after = eigenvalues(&conj)?;
    let scale = before.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    report.check("spectrum", spectrum_distance(&before, &after)? / scale, options.spectrum_tolerance);
    report.condition = Some(cond);
    Ok(report)
}

fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> DMatrix<C<f64>> {
    DMatrix::from_fn(n, n, |_, _| Complex::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
}

fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<C<f64>> {
    (0..n).map(|_| Complex::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))).collect()
}

pub(super) fn coherence_suite(config: &SuiteConfig) -> Result<VerificationReport> {
    let grid = config.grid.resolve(0.0, 1.0, 16, false)?;
    let n = grid.len();
    let tol = config.tol("coherence");
    let options = CoherenceOptions {
        inner_tolerance: tol.get("inner_product", 1e-8),
        spectrum_tolerance: tol.get("spectrum", 1e-6),
        threshold: config.threshold,
    };
    let mut rng = config.rng("coherence");
    let instances = 20;
    let mut inner = 0.0f64;
    let mut spectrum = 0.0f64;
    let mut worst_condition = 0.0f64;
    let root = (n as f64).sqrt();
    for _ in 0..instances {
        let r = random_matrix(&mut rng, n);
        let g = Metric::new(OperatorMatrix::on_grid(&r * r.adjoint() + DMatrix::identity(n, n), &grid))?;
        let noise = random_matrix(&mut rng, n) / Complex::new(root, 0.0);
        let w = OperatorMatrix::on_grid(DMatrix::identity(n, n) * Complex::new(2.0, 0.0) + noise, &grid);
        // Hermitian A keeps the eigenvalue problem well conditioned
        let h = random_matrix(&mut rng, n);
        let a = OperatorMatrix::on_grid((&h + h.adjoint()) * Complex::new(0.5, 0.0), &grid);
        let phi = random_vector(&mut rng, n);
        let psi = random_vector(&mut rng, n);
        let r = check_transformation_coherence(&g, &w, &a, &phi, &psi, &options)?;
        inner = inner.max(r.residuals["inner_product"]);
        spectrum = spectrum.max(r.residuals["spectrum"]);
        if let Some(c) = r.condition {
            worst_condition = worst_condition.max(c.condition_number());
        }
    }
    let mut report = VerificationReport::new("coherence");
    report.check("max_inner_product", inner, options.inner_tolerance);
    report.check("max_spectrum", spectrum, options.spectrum_tolerance);
    report.measure("instances", instances as f64);
    report.measure("worst_condition_number", worst_condition);
    report.note("G = RRᴴ + I and W = 2I + R/√n with complex uniform R");
    Ok(report)
}
