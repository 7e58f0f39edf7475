//! Crate-wide error type and the exit-code mapping used by the CLI.

use thiserror::Error;

/// Errors raised by validation, enumeration guards, and the hard score
/// invariants.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad parameter or inconsistent input (exit code 2).
    #[error("validation: {0}")]
    Validation(String),

    /// Mismatched table/alphabet dimensions (exit code 2).
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Sequences of different length where equal length is required (exit code 2).
    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    /// Sequences over different alphabets (exit code 2).
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    /// A sequence that is not a valid outcome of the block model (exit code 2).
    #[error("malformed sequence: {0}")]
    MalformedSequence(String),

    /// A (t, u, r) triple with no nonnegative-integer block solution (exit code 2).
    #[error("infeasible triple: {0}")]
    InfeasibleTriple(String),

    /// The random transformation cannot act on this input (exit code 2).
    #[error("transformation inapplicable: {0}")]
    Inapplicable(String),

    /// Conditioning on a (u, v) value outside the support (exit code 2).
    #[error("empty fiber: {0}")]
    EmptyFiber(String),

    /// An exhaustive-enumeration size guard refused the request (exit code 4).
    #[error("resource guard: {0}")]
    Guard(String),

    /// A hard invariant failed; this signals an implementation bug (exit code 3).
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 0 ok, 2 validation, 3 invariant violation, 4 resource guard.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Guard(_) => 4,
            Error::InvariantViolation(_) => 3,
            _ => 2,
        }
    }

    /// Stable machine-readable kind tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::Dimension(_) => "dimension",
            Error::LengthMismatch(_) => "length_mismatch",
            Error::AlphabetMismatch(_) => "alphabet_mismatch",
            Error::MalformedSequence(_) => "malformed_sequence",
            Error::InfeasibleTriple(_) => "infeasible_triple",
            Error::Inapplicable(_) => "inapplicable",
            Error::EmptyFiber(_) => "empty_fiber",
            Error::Guard(_) => "guard",
            Error::InvariantViolation(_) => "invariant_violation",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
