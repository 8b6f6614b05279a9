use nalgebra::DVector;
use thiserror::Error;

/// Errors surfaced by model construction, exact solvers, and the experiment
/// harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("stationary distribution did not converge: {0}")]
    NonErgodicChain(String),

    /// A linear system `A w = b` with singular `A`. Carries the numerical
    /// rank and an orthonormal basis of the null space so callers can
    /// inspect which weight directions are unconstrained.
    #[error("singular system: rank {rank} of {dim}")]
    SingularSystem {
        rank: usize,
        dim: usize,
        nullspace: Vec<DVector<f64>>,
    },

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("toml error: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
