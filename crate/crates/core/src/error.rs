use thiserror::Error;

/// Errors raised by model construction and verification.
///
/// Verification failures are never errors: they are entries in a
/// [`crate::report::VerificationReport`]. Errors mean an input could not be
/// processed at all.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero divisor polynomial")]
    ZeroDivisor,

    #[error("degenerate critical points (separation {separation:.3e})")]
    DegenerateCriticalPoints { separation: f64 },

    #[error("degenerate functional")]
    DegenerateFunctional,

    #[error("degenerate A-form")]
    DegenerateAForm,

    #[error("singular Gram matrix")]
    SingularGram,

    #[error("not semisimple")]
    NotSemisimple,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid branch list: expected {expected} signs, got {got}")]
    InvalidBranch { expected: usize, got: usize },

    #[error("degenerate weight: |mu| = {0:.3e} is below tolerance")]
    DegenerateWeight(f64),

    #[error("ansatz degenerate: no admissible monomials")]
    EmptyAnsatz,

    #[error("no inverse Gram")]
    NoInverseGram,

    #[error("frame continuation failed")]
    FrameContinuation,

    #[error("transition tensor not closed (defect {defect:.3e})")]
    TransitionNotClosed { defect: f64 },

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for errors meaning "the model itself is degenerate".
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::DegenerateCriticalPoints { .. }
                | Error::DegenerateFunctional
                | Error::DegenerateAForm
                | Error::SingularGram
                | Error::NotSemisimple
                | Error::DegenerateWeight(_)
                | Error::NoInverseGram
                | Error::FrameContinuation
                | Error::TransitionNotClosed { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
