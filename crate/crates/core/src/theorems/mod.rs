//! Executable verification suites.
//!
//! Every suite returns a [`VerificationReport`]. Numerical shortfalls are
//! reported as failing residuals rather than errors; errors are reserved for
//! misuse (wrong kernel kind, inconsistent inputs). Suites run in double
//! precision, which is what their tolerances are calibrated for.

mod coherence;
mod equations;
mod generalized;
mod spectral;
mod tensor;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::Grid;
use crate::kernels::ConditionReport;

pub use coherence::{check_transformation_coherence, CoherenceOptions};
pub use equations::{check_kernel_equations, check_riccati, check_xdx_intertwine};
pub use generalized::{
    random_instance, smooth_from_generalized, GeneralizedOptions, GeneralizedInstance,
};
pub use spectral::{check_derivative_preservation, check_fourier_diagonalizes};
pub use tensor::{check_nonlinear_tensor, check_product_preservation, check_rank_one_preservation};

/// Structured outcome of a verification suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub passed: bool,
    pub residuals: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub condition: Option<ConditionReport>,
    /// Informational values that carry no pass/fail meaning on their own.
    pub measurements: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: true,
            residuals: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            condition: None,
            measurements: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// Records a residual with its tolerance.
    pub fn check(&mut self, label: impl Into<String>, residual: f64, tolerance: f64) {
        let label = label.into();
        self.residuals.insert(label.clone(), residual);
        self.tolerances.insert(label, tolerance);
        self.refresh();
    }

    pub fn measure(&mut self, label: impl Into<String>, value: f64) {
        self.measurements.insert(label.into(), value);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Folds another report in, prefixing its labels.
    pub fn absorb(&mut self, prefix: &str, other: VerificationReport) {
        for (k, v) in other.residuals {
            self.residuals.insert(format!("{prefix}.{k}"), v);
        }
        for (k, v) in other.tolerances {
            self.tolerances.insert(format!("{prefix}.{k}"), v);
        }
        for (k, v) in other.measurements {
            self.measurements.insert(format!("{prefix}.{k}"), v);
        }
        self.notes.extend(other.notes.into_iter().map(|n| format!("{prefix}: {n}")));
        if self.condition.is_none() {
            self.condition = other.condition;
        }
        self.refresh();
    }

    fn refresh(&mut self) {
        self.passed = self
            .residuals
            .iter()
            .all(|(k, r)| self.tolerances.get(k).is_some_and(|t| *r <= *t));
    }
}

/// Grid overrides applied on top of a suite's default grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GridOverride {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub n: Option<usize>,
    pub periodic: Option<bool>,
}

impl GridOverride {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    pub fn resolve(&self, lo: f64, hi: f64, n: usize, periodic: bool) -> Result<Grid<f64>> {
        Grid::uniform(
            self.lo.unwrap_or(lo),
            self.hi.unwrap_or(hi),
            self.n.unwrap_or(n),
            self.periodic.unwrap_or(periodic),
        )
    }
}

/// Shared knobs for the suite runner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub threshold: f64,
    /// Keyed by `suite.label` or bare `label`.
    pub tolerances: BTreeMap<String, f64>,
    pub grid: GridOverride,
    pub kernel: Option<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            threshold: crate::kernels::DEFAULT_THRESHOLD,
            tolerances: BTreeMap::new(),
            grid: GridOverride::default(),
            kernel: None,
        }
    }
}

impl SuiteConfig {
    pub fn tolerance(&self, suite: &str, label: &str, default: f64) -> f64 {
        self.tolerances
            .get(&format!("{suite}.{label}"))
            .or_else(|| self.tolerances.get(label))
            .copied()
            .unwrap_or(default)
    }

    /// Generator seeded from the run seed and the suite name.
    pub(crate) fn rng(&self, suite: &str) -> ChaCha8Rng {
        // FNV-1a keeps streams distinct per suite and stable across builds
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in suite.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        ChaCha8Rng::seed_from_u64(self.seed ^ h)
    }
}

/// Tolerance lookup bound to one suite.
pub(crate) struct Tol<'a> {
    suite: &'a str,
    config: &'a SuiteConfig,
}

impl Tol<'_> {
    pub(crate) fn get(&self, label: &str, default: f64) -> f64 {
        self.config.tolerance(self.suite, label, default)
    }
}

impl SuiteConfig {
    pub(crate) fn tol<'a>(&'a self, suite: &'a str) -> Tol<'a> {
        Tol { suite, config: self }
    }
}

/// Suite ids in their run order.
pub const SUITES: [&str; 10] = [
    "fourier",
    "derivative",
    "generalized",
    "generalized-property",
    "product",
    "intertwine",
    "kernel-pde",
    "riccati",
    "nonlinear",
    "coherence",
];

/// Runs one suite by id.
pub fn run_suite(id: &str, config: &SuiteConfig) -> Result<VerificationReport> {
    let mut report = match id {
        "fourier" => spectral::fourier_suite(config),
        "derivative" => spectral::derivative_suite(config),
        "generalized" => generalized::generalized_suite(config),
        "generalized-property" => generalized::property_suite(config),
        "product" => tensor::product_suite(config),
        "intertwine" => equations::intertwine_suite(config),
        "kernel-pde" => equations::kernel_pde_suite(config),
        "riccati" => equations::riccati_suite(config),
        "nonlinear" => tensor::nonlinear_suite(config),
        "coherence" => coherence::coherence_suite(config),
        other => Err(domain(format!("unknown suite `{other}`"))),
    }?;
    report.name = id.to_string();
    Ok(report)
}

/// Max-norm of the entrywise difference of two equally long slices.
pub(crate) fn max_diff(a: &[crate::C<f64>], b: &[crate::C<f64>]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (p, q)| acc.max((p - q).norm()))
}
