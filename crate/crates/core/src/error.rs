use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{unknowns} unknowns exceed the configured cap of {cap}")]
    TooLarge { unknowns: usize, cap: usize },

    #[error("eigensolver stopped after {iterations} iterations with worst residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("spectrum computed up to {available} but level {requested} was requested; recompute with a larger cutoff")]
    InsufficientCutoff { requested: f64, available: f64 },

    #[error("truncated spectrum leaves a tail bound of {tail:e} above the tolerance {tolerance:e}")]
    TruncatedTail { tail: f64, tolerance: f64 },

    #[error("empty spectral subspace below level {0}")]
    EmptySpectralWindow(f64),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("ball of radius {radius} around {center:?} leaves the computational box")]
    OutsideDomain { center: Vec<f64>, radius: f64 },

    #[error("eigenfunction tail not resolved (boundary weight {tail:e}); use a halfwidth of at least {required_halfwidth}")]
    UnresolvedTail { tail: f64, required_halfwidth: f64 },

    #[error("observability matrix is indefinite: smallest eigenvalue {min_eigenvalue:e}, largest {max_eigenvalue:e}")]
    IndefiniteGramian { min_eigenvalue: f64, max_eigenvalue: f64 },

    #[error("singular observability matrix cannot be inverted without regularization")]
    SingularSystem,

    #[error("mode {mode:?}: {cause}")]
    Mode { mode: Vec<i64>, cause: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, alloc::format!("must be finite and positive, got {value}")))
    }
}
