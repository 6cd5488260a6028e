use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("chaotic map produced a non-finite value at iteration {iteration}")]
    ChaosNumeric { iteration: usize },

    #[error("invalid key: {0}")]
    InvalidKey(String),

    #[error(
        "permutation parameter r{index} = {value} is not invertible for dimension {dimension} \
         (gcd(31*r, {dimension}) != 1)"
    )]
    KeyDimensionIncompatible {
        index: usize,
        value: u8,
        dimension: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("no candidate survives the constraints at sequence position {position}")]
    EmptyCandidate { position: usize },

    #[error("channels disagree on the combined keystream at sequence position {position}")]
    CrossCheckMismatch { position: usize },

    #[error("permutation parameter r{index} is ambiguous: candidates {candidates:?}")]
    AmbiguousParameter { index: usize, candidates: Vec<u8> },

    #[error("marker pixel not found after stripping diffusion: {0}")]
    MarkerNotFound(String),

    #[error("permutation parameter r{index}: too few discriminative anchors (found {found}, need {needed})")]
    InsufficientContrast {
        index: usize,
        found: usize,
        needed: usize,
    },

    #[error("permutation parameter r{index}: every candidate was rejected")]
    NoCandidate { index: usize },

    #[error("oracle query budget of {budget} exhausted")]
    QueryBudgetExceeded { budget: usize },

    #[error("bit sequence too short: need at least {needed} bits, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
