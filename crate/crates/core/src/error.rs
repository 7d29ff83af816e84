use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("envelope has no power (total power {0:e})")]
    ZeroEnvelope(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {coordinate} is not a lattice point of the grid state")]
    OutOfGrid { coordinate: f64 },

    #[error("coincident-momentum states have a delta-valued momentum amplitude; use envelope accessors")]
    DistributionalState,

    #[error("second moment diverges: {0}")]
    InfiniteMoment(String),

    #[error("slice psi'(X,0,...,0) has no power")]
    ZeroSlice,

    #[error("{op} does not support {variant} states")]
    UnsupportedVariant { op: &'static str, variant: &'static str },

    #[error("state is not normalizable: {0}")]
    NonNormalizable(String),

    #[error("schedule mismatch: {0}")]
    ScheduleMismatch(String),

    #[error("residual dispersion {0:e} is not compensated")]
    ResidualDispersion(f64),

    #[error("k-grids do not match: {0}")]
    GridMismatch(String),

    #[error("target pattern has no intensity")]
    EmptyTarget,

    #[error("{tail:e} of the norm lies outside the grid")]
    TailTooHeavy { tail: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("chain step {index}: {source}")]
    ChainStep { index: usize, source: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable name, used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroEnvelope(_) => "ZeroEnvelope",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::OutOfGrid { .. } => "OutOfGrid",
            Error::DistributionalState => "DistributionalState",
            Error::InfiniteMoment(_) => "InfiniteMoment",
            Error::ZeroSlice => "ZeroSlice",
            Error::UnsupportedVariant { .. } => "UnsupportedVariant",
            Error::NonNormalizable(_) => "NonNormalizable",
            Error::ScheduleMismatch(_) => "ScheduleMismatch",
            Error::ResidualDispersion(_) => "ResidualDispersion",
            Error::GridMismatch(_) => "GridMismatch",
            Error::EmptyTarget => "EmptyTarget",
            Error::TailTooHeavy { .. } => "TailTooHeavy",
            Error::InvalidInput(_) => "InvalidInput",
            Error::ChainStep { source, .. } => source.kind(),
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }

    /// True for errors caused by malformed or inconsistent input rather than
    /// by a computation that has no finite answer.
    pub fn is_validation(&self) -> bool {
        if let Error::ChainStep { source, .. } = self {
            return source.is_validation();
        }
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::ScheduleMismatch(_)
                | Error::GridMismatch(_)
                | Error::EmptyTarget
                | Error::InvalidInput(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
