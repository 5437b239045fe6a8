use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("state has dimension zero")]
    ZeroDimension,

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(&'static str),

    #[error("phase undefined at zero")]
    ZeroAmplitude,

    #[error("Berry phase undefined: loop contains orthogonal adjacent states")]
    UndefinedBerryPhase,

    #[error("cyclic path needs at least 2 states, got {0}")]
    PathTooShort(usize),

    #[error("length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("internal consistency: imaginary residue {0:e} in loop sum")]
    ImaginaryResidue(f64),

    #[error("internal consistency: negative probability {0:e}")]
    NegativeProbability(f64),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invalid world: {0}")]
    InvalidWorld(String),

    #[error("unknown road `{0}`")]
    UnknownRoad(String),

    #[error("world has no round trips")]
    NoRoundTrips,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
