use thiserror::Error;

/// Errors raised by the library. Verification routines report constraint
/// violations in their report types; these variants are for inputs that
/// cannot be processed at all.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("subsystem index {index} out of range for {len} subsystems")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("operator has rank {rank}, expected at most 1")]
    RankTooHigh { rank: usize },

    #[error("member at {position} has rank {rank}, expected at most 1")]
    MemberRank { position: String, rank: usize },

    #[error("member at {position} is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { position: String, min_eigenvalue: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("Kraus operators are not complete (deviation {0:.3e})")]
    KrausIncomplete(f64),

    #[error("channel is not CPTP (cp: {cp}, tp: {tp})")]
    NotCptp { cp: bool, tp: bool },

    #[error("no-signaling violation of magnitude {magnitude:.3e} at {location}")]
    Signaling { location: String, magnitude: f64 },

    #[error("member traces are not normalized (deviation {0:.3e})")]
    NotNormalized(f64),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("mode incompatible with scenario: {0}")]
    ModeMismatch(String),

    #[error("reference coefficients violate the constraint system (residual {0:.3e})")]
    InconsistentReference(f64),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
