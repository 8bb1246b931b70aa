use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported order {order}: {context}")]
    UnsupportedOrder { order: usize, context: String },

    #[error("kernel `{kernel}` is not finite at (x = {x}, y = {y})")]
    Evaluation { kernel: String, x: f64, y: f64 },

    #[error("singular transform: no singular value survives truncation")]
    SingularTransform,

    #[error("metric is degenerate or indefinite (smallest eigenvalue {min_eigenvalue:e})")]
    MetricDegenerate { min_eigenvalue: f64 },

    #[error("Riccati solution blows up near (x = {x}, y = {y}), |g| = {magnitude:e}")]
    RiccatiSingularity { x: f64, y: f64, magnitude: f64 },

    #[error("kernel `{kernel}` failed its derivative self-check: {detail}")]
    KernelSelfCheck { kernel: String, detail: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not a generalized solution: {0}")]
    NotASolution(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
