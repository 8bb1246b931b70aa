//! Kernel coordinate changes for local differential operators.
//!
//! The core is generic over the scalar type (`f32` or `f64`); the aliases at
//! the bottom fix it to `f64` for everyday use.

pub mod coeff;
pub mod distributions;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod matrix;
pub mod operators;
pub mod quadrature;
pub mod scalar;
pub mod theorems;

pub use coeff::Coefficient;
pub use distributions::{
    apply_constant_coeff_operator, differentiate, pair, GeneralizedFunction, Jump, SingularTerm,
    TestFunction,
};
pub use error::{Error, Result};
pub use grid::{diff_matrix, inner_product, make_uniform_grid, Grid};
pub use kernels::{
    apply, discretize, discretize_between, invert, kernel_pde_residual, riccati_kernel, tabulate,
    ConditionReport, Kernel, PdeResidual, Rect, ResidualDomain,
};
pub use matrix::OperatorMatrix;
pub use operators::{
    conjugate, eigenvalues, intertwining_residual, locality_score, spectrum_distance, to_matrix,
    transform_metric, LocalOperator, Metric,
};
pub use scalar::{Complex, Real, C};
pub use theorems::{run_suite, SuiteConfig, VerificationReport, SUITES};

pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type OperatorMatrix64 = OperatorMatrix<f64>;
pub type GeneralizedFunction64 = GeneralizedFunction<f64>;
pub type TestFunction64 = TestFunction<f64>;
pub type Kernel64 = Kernel<f64>;
