use crate::annotation::SpeakerId;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector norm {0:e} is too small to normalize")]
    ZeroNorm(f64),

    #[error("vector contains non-finite values")]
    NonFinite,

    #[error("invalid segment [{start}, {end}]: end must exceed start")]
    InvalidSegment { start: f64, end: f64 },

    #[error("speaker {speaker} has overlapping segments at {at}s")]
    SelfOverlap { speaker: SpeakerId, at: f64 },

    #[error("no samples to fit")]
    EmptySamples,

    #[error("model has no classes; fit it before predicting")]
    Unfitted,

    #[error("class {0} was not enrolled")]
    UnknownClass(SpeakerId),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("speaker {speaker} accumulated only {accumulated:.3}s of the required {required:.3}s")]
    UnreachableSplit {
        speaker: SpeakerId,
        accumulated: f64,
        required: f64,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("scoring region is empty")]
    EmptyUem,

    #[error("DER undefined: no reference speech inside the scoring region")]
    UndefinedDer,

    #[error("no frames with a single-speaker ground truth")]
    NoEligibleFrames,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("cannot place {n} speaker means {angle} degrees apart in dimension {dim}")]
    Infeasible { n: usize, angle: f64, dim: usize },

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
