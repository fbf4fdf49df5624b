use thiserror::Error;

/// Errors raised by the parameter builders, discrete operators and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{0}` must be strictly positive")]
    NonPositiveParameter(&'static str),
    #[error("adiabatic exponent must exceed 1, got {0}")]
    GammaOutOfRange(f64),
    #[error("invalid profile parameter `{name}`: {reason}")]
    InvalidProfileParameter { name: &'static str, reason: String },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field has {got} values but the grid has {expected} nodes")]
    MisalignedField { expected: usize, got: usize },
    #[error("norm exponent must be >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("positivity lost in `{field}` at node {node} (t = {t})")]
    PositivityLoss {
        field: &'static str,
        node: usize,
        t: f64,
    },
    #[error("layer reached the right boundary: deviation {deviation} exceeds {limit}")]
    LayerNearBoundary { deviation: f64, limit: f64 },
    #[error("states do not match: {0}")]
    StateMismatch(String),
    #[error("time must be strictly positive, got {0}")]
    NonPositiveTime(f64),
    #[error("argument must be strictly positive, got {0}")]
    NonPositiveArgument(f64),
    #[error("need at least {needed} samples in the fit window, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("series value at index {0} is not strictly positive")]
    NonPositiveValue(usize),
    #[error("invalid fit window [{t0}, {t1}]")]
    InvalidWindow { t0: f64, t1: f64 },
    #[error("invalid quadrature spec: {0}")]
    InvalidQuadSpec(String),
    #[error("invalid time step: {0}")]
    InvalidTimeStep(String),
}

pub type Result<T> = std::result::Result<T, Error>;
