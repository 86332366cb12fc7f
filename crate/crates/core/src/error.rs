//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RspError {
    #[error("bloch vector norm {0} exceeds 1")]
    BlochNormTooLarge(f64),

    #[error("radius {0} outside [0, 1]")]
    RadiusOutOfRange(f64),

    #[error("angles out of range: phi={phi}, theta={theta}")]
    AnglesOutOfRange { phi: f64, theta: f64 },

    #[error("area {0} outside (0, 4π]")]
    AreaOutOfRange(f64),

    #[error("not a valid density matrix: {0}")]
    InvalidDensity(String),

    #[error("malformed ensemble: {0}")]
    MalformedEnsemble(String),

    #[error("probability-sum: probabilities sum to {0}, expected 1")]
    ProbabilitySum(f64),

    #[error("state norm {0} exceeds 1")]
    NormTooLarge(f64),

    #[error("orientation matrix is not a rotation")]
    NonOrthogonalOrientation,

    #[error("ensemble of {n} states is too large for exact enumeration (limit {limit}); use upper_bound or heuristic_threshold")]
    TooLargeForExact { n: usize, limit: usize },

    #[error("uniform-required: the upper-bound algorithm assumes equal state probabilities")]
    UniformRequired,

    #[error("unsupported cbit count {0} for this operation")]
    UnsupportedCbits(u32),

    #[error("{got} hull vertices exceed the 2^{cbits} message capacity")]
    TooManyVertices { got: usize, cbits: u32 },

    #[error("size mismatch: got {got}, expected {expected}")]
    SizeMismatch { got: usize, expected: usize },

    #[error("message index {index} out of range for {cbits} cbits")]
    MessageIndexOutOfRange { index: usize, cbits: u32 },

    #[error("invalid messaging strategy: {0}")]
    InvalidStrategy(String),

    #[error("degenerate generator points: {0}")]
    DegenerateSeeds(String),

    #[error("operation requires sampled mode with at least one shot")]
    SampledModeRequired,

    #[error("tomography counts have zero shots per setting")]
    ZeroShots,

    #[error("identifier mismatch: {0}")]
    IdentifierMismatch(String),

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl RspError {
    /// Process exit code: 2 for input errors, 3 for internal inconsistencies.
    pub fn exit_code(&self) -> i32 {
        match self {
            RspError::InternalInconsistency(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, RspError>;
