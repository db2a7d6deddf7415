use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in field `{field}` at index {index}")]
    NonFiniteValue { field: &'static str, index: usize },

    #[error("wrong arity for `{field}`: expected {expected}, got {got}")]
    WrongArity {
        field: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("frame index {got} on line {line} is not the expected {expected}")]
    NonMonotoneFrameIndex {
        line: usize,
        expected: usize,
        got: usize,
    },

    #[error("duplicate annotation for clip `{clip_id}` by rater `{rater_id}`")]
    DuplicateAnnotation { clip_id: String, rater_id: String },

    #[error("value {value} for `{field}` outside [{lo}, {hi}]")]
    Range {
        field: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid manifest: {0}")]
    Manifest(String),

    #[error("span [{start}, {end}) out of range for trace of length {len}")]
    SpanOutOfRange { start: usize, end: usize, len: usize },

    #[error("degenerate landmark shape (all points coincide)")]
    DegenerateShape,

    #[error("frame {got} pushed out of order (expected {expected})")]
    OutOfOrderFrame { expected: usize, got: usize },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("loss is not finite")]
    NonFiniteLoss,

    #[error("training set is empty")]
    EmptyTrainSet,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("need at least {min} samples, got {got}")]
    TooShort { min: usize, got: usize },

    #[error("degenerate two-way ANOVA (BMS + (k-1)EMS = 0)")]
    DegenerateAnova,

    #[error("zero inter-ocular distance in ground truth")]
    ZeroInterOcular,

    #[error("rater `{0}` shares fewer than two clips with other raters")]
    InsufficientOverlap(String),

    #[error("clip `{0}` has a single rater")]
    SingleRaterClip(String),

    #[error("predictions and labels are misaligned: {0}")]
    Misalignment(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
