//! Error types shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the moment-model toolkit and the transport solver.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument left its mathematical domain (e.g. |mu| > 1).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid configuration (grid, schedule, model order, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// An API contract was violated (length mismatch and the like).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A moment vector required to be realizable is not.
    #[error("non-realizable moments: {0}")]
    NonRealizable(String),

    /// The entropy ansatz exp(b^T alpha) overflowed; the caller should
    /// regularize or rescale before retrying.
    #[error("ansatz overflow: max exponent {max_exponent:.3} exceeds {limit}")]
    AnsatzOverflow { max_exponent: f64, limit: f64 },

    /// The dual Newton solver exhausted its regularization schedule.
    #[error(
        "closure failure: gradient norm {gradient_norm:.3e} after {iterations} iterations \
         (last regularization {regularization:.1e})"
    )]
    ClosureFailure {
        gradient_norm: f64,
        iterations: usize,
        regularization: f64,
    },

    /// A transport step failed in a specific cell.
    #[error("step failure in cell {cell} at t = {time}: {source}")]
    StepFailure {
        cell: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    /// A cell mean left the realizable set after a full IMEX step. The
    /// scheme guarantees this cannot happen in exact arithmetic, so this
    /// is reported as a hard failure instead of being repaired.
    #[error("realizability violated at step {step}, cell {cell}: margin {margin:.3e}")]
    RealizabilityViolation {
        step: usize,
        cell: usize,
        margin: f64,
    },

    /// A linear system that should be regular could not be solved.
    #[error("singular linear system: {0}")]
    SingularSystem(String),
}
