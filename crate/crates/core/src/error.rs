use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A numeric argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature or truncation grid is too coarse for the requested state.
    #[error("aliasing: {points} quadrature points for cutoff {cutoff} and harmonic {harmonic}; need at least {required}")]
    Aliasing {
        points: usize,
        required: usize,
        cutoff: usize,
        harmonic: i64,
    },

    /// A state with zero norm was passed where a physical state is required.
    #[error("state has zero norm")]
    ZeroNorm,

    /// The mean complex amplitude vanishes, so no phase reference exists.
    #[error("undefined phase: <a> = 0")]
    UndefinedPhase,

    /// The ensemble eigenweights are too small for a stable dual basis.
    #[error("near-degenerate ensemble: c_{r}^2 = {value:.3e} below threshold {threshold:.1e}")]
    NearDegenerate { r: usize, value: f64, threshold: f64 },

    /// Parameters fall outside the regime where the formula applies.
    #[error("regime error: {0}")]
    Regime(String),

    /// An iterative solve did not reach the requested accuracy.
    #[error("did not converge: {0}")]
    NonConverged(String),

    /// Two objects that must have been built together do not match.
    #[error("configuration mismatch: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
