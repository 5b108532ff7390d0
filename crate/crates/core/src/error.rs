use std::io;

use thiserror::Error;

/// Every failure the toolkit can report.
///
/// Variants map one-to-one onto the stable machine-readable codes returned by
/// [`Error::code`], which the command-line front end prints before the detail.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not a RIFF/WAVE file: {0}")]
    NotWav(String),
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("truncated file: {0}")]
    TruncatedFile(String),
    #[error("audio too short: {len} samples, need at least {needed}")]
    AudioTooShort { len: usize, needed: usize },
    #[error("invalid frame spec: {0}")]
    BadFrameSpec(String),
    #[error("invalid filterbank: {0}")]
    BadFilterbank(String),
    #[error("frame count mismatch: {0} vs {1}")]
    FrameCountMismatch(usize, usize),
    #[error("wrong feature kind: expected {expected}, got {got}")]
    WrongKind { expected: String, got: String },
    #[error("too few frames: {0}")]
    TooFewFrames(usize),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("wrong model kind: expected {expected}, got {got}")]
    WrongModelKind { expected: String, got: String },
    #[error("too few queries: {0}")]
    TooFewQueries(usize),
    #[error("degenerate variance")]
    DegenerateVariance,
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("empty sequence")]
    EmptySequence,
    #[error("numerical divergence: {0}")]
    NumericalDivergence(String),
    #[error("embedding source list mismatch: {0}")]
    SourceListMismatch(String),
    #[error("empty vocabulary")]
    EmptyVocabulary,
    #[error("expected 4 votes, got {0}")]
    BadVoteCount(usize),
    #[error("vote value out of range: {0}")]
    BadVoteValue(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("only one class present")]
    OneClassOnly,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("too short: {0}")]
    TooShort(usize),
    #[error("unknown feature stream: {0}")]
    UnknownFeature(String),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("bad file format: {0}")]
    Format(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Stable upper-snake-case code for machine consumption.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotWav(_) => "NOT_WAV",
            Error::UnsupportedEncoding(_) => "UNSUPPORTED_ENCODING",
            Error::TruncatedFile(_) => "TRUNCATED_FILE",
            Error::AudioTooShort { .. } => "AUDIO_TOO_SHORT",
            Error::BadFrameSpec(_) => "BAD_FRAME_SPEC",
            Error::BadFilterbank(_) => "BAD_FILTERBANK",
            Error::FrameCountMismatch(..) => "FRAME_COUNT_MISMATCH",
            Error::WrongKind { .. } => "WRONG_KIND",
            Error::TooFewFrames(_) => "TOO_FEW_FRAMES",
            Error::EmptyDataset => "EMPTY_DATASET",
            Error::ShapeMismatch(_) => "SHAPE_MISMATCH",
            Error::WrongModelKind { .. } => "WRONG_MODEL_KIND",
            Error::TooFewQueries(_) => "TOO_FEW_QUERIES",
            Error::DegenerateVariance => "DEGENERATE_VARIANCE",
            Error::DimMismatch(_) => "DIM_MISMATCH",
            Error::EmptySequence => "EMPTY_SEQUENCE",
            Error::NumericalDivergence(_) => "NUMERICAL_DIVERGENCE",
            Error::SourceListMismatch(_) => "SOURCE_LIST_MISMATCH",
            Error::EmptyVocabulary => "EMPTY_VOCABULARY",
            Error::BadVoteCount(_) => "BAD_VOTE_COUNT",
            Error::BadVoteValue(_) => "BAD_VOTE_VALUE",
            Error::InsufficientData(_) => "INSUFFICIENT_DATA",
            Error::OneClassOnly => "ONE_CLASS_ONLY",
            Error::LengthMismatch(..) => "LENGTH_MISMATCH",
            Error::TooShort(_) => "TOO_SHORT",
            Error::UnknownFeature(_) => "UNKNOWN_FEATURE",
            Error::BadConfig(_) => "BAD_CONFIG",
            Error::CheckFailed(_) => "CHECK_FAILED",
            Error::Format(_) => "BAD_FORMAT",
            Error::Json(_) => "BAD_JSON",
            Error::Io(_) => "IO_ERROR",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
