//! Error type shared across the crate.

use thiserror::Error;

/// Errors reported by the numerical kernels and drivers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An input violates a structural requirement of a transform, e.g. a
    /// Cayley map applied to a polynomial vanishing at the pole.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// An algebra or matrix inversion got too close to singular. Carries the
    /// norm that tripped the detection.
    #[error("ill-conditioned inversion (offending norm {norm:.3e})")]
    IllConditioned { norm: f64 },

    #[error("matrix is rank deficient (detected rank {rank})")]
    RankDeficient { rank: usize },

    #[error("sketched numerical rank {actual} fell below the requested target")]
    RankBelowTarget { actual: usize },

    #[error("matrix is singular to working precision")]
    SingularMatrix,

    #[error("factor {index} of the filter product is singular to working precision")]
    SingularFactor { index: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigenvalue iteration failed to converge (unresolved block {lo}..{hi})")]
    NoConvergence { lo: usize, hi: usize },

    /// The square-root modular iteration collapsed: the residue `y^2 + 1`
    /// lost essentially all of its mass, which happens when the input has no
    /// real roots.
    #[error(
        "instability detected at iteration {iteration}: ||t_k||/||p|| = {ratio:.3e} collapsed"
    )]
    InstabilityDetected { iteration: usize, ratio: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
