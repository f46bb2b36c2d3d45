use std::path::PathBuf;

use thiserror::Error;

/// Every failure carries a stable machine-readable code (see [`Error::code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("unbalanced span markers at char {position}")]
    MarkerUnbalanced { position: usize },
    #[error("more than one marked span")]
    MarkerMultiple,
    #[error("marked span is empty")]
    EmptySpan,
    #[error("bad header: expected {expected:?}, found {found:?}")]
    BadHeader { expected: String, found: String },
    #[error("row {row}: unknown error category {category:?}")]
    UnknownCategory { row: usize, category: String },
    #[error("row {row}: cannot parse severity {severity:?}")]
    SeverityParse { row: usize, severity: String },
    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("row {row}: malformed row: {detail}")]
    MalformedRow { row: usize, detail: String },
    #[error("row {row}: translation text conflicts with an earlier row for the same unit")]
    UnitConflict { row: usize },
    #[error("field {field} contains a tab or newline")]
    TabInField { field: String },
    #[error("row {row}: bad relative-ranking value {value:?}")]
    BadValue { row: usize, value: String },
    #[error("row {row}: system_a equals system_b ({system})")]
    SelfPair { row: usize, system: String },
    #[error("input is not valid UTF-8 at byte {position}")]
    Utf8 { position: usize },
    #[error("corrupt project store: {detail}")]
    StoreCorrupt { detail: String },
    #[error("unsupported schema version {found}")]
    Version { found: u64 },
    #[error("cannot write store at {path}: {detail}")]
    StoreWrite { path: PathBuf, detail: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("empty normalization group")]
    EmptyGroup,
    #[error("no annotations for setting {setting}")]
    NoAnnotations { setting: String },
    #[error("missing score: {detail}")]
    MissingScore { detail: String },
    #[error("project has no designated system pairs")]
    NoPairs,
    #[error("alpha undefined: every label falls in a single category")]
    Degenerate,
    #[error("empty input: {detail}")]
    Empty { detail: String },
    #[error("annotator {annotator} has no common segments for {system_a} / {system_b}")]
    NoOverlap {
        annotator: String,
        system_a: String,
        system_b: String,
    },
    #[error("label units differ between settings")]
    UnitMismatch,
    #[error("score vectors differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {min} paired scores, got {got}")]
    TooShort { min: usize, got: usize },
    #[error("systems {system_a} and {system_b} are not scored on the same segments")]
    SegmentMismatch { system_a: String, system_b: String },
    #[error("insufficient similar-quality pairs: {detail}")]
    InsufficientPairs { detail: String },
    #[error("no cross-setting error matches")]
    NoMatches,
    #[error("too few annotators: need {min}, got {got}")]
    TooFew { min: usize, got: usize },
    #[error("annotator pool of {pool} is smaller than {k}")]
    PoolTooSmall { pool: usize, k: usize },
    #[error("unknown annotator {0}")]
    UnknownAnnotator(String),
    #[error("unknown task {0}")]
    UnknownTask(String),
    #[error("task {task} belongs to {owner}, not {submitter}")]
    WrongAnnotator {
        task: String,
        owner: String,
        submitter: String,
    },
    #[error("invalid submission: {detail}")]
    Validation { detail: String },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::MarkerUnbalanced { .. } => "E_MARKER_UNBALANCED",
            Error::MarkerMultiple => "E_MARKER_MULTIPLE",
            Error::EmptySpan => "E_SPAN_EMPTY",
            Error::BadHeader { .. } => "E_BAD_HEADER",
            Error::UnknownCategory { .. } => "E_UNKNOWN_CATEGORY",
            Error::SeverityParse { .. } => "E_SEVERITY_PARSE",
            Error::Row { source, .. } => source.code(),
            Error::MalformedRow { .. } => "E_MALFORMED_ROW",
            Error::UnitConflict { .. } => "E_UNIT_CONFLICT",
            Error::TabInField { .. } => "E_TAB_IN_FIELD",
            Error::BadValue { .. } => "E_BAD_VALUE",
            Error::SelfPair { .. } => "E_SELF_PAIR",
            Error::Utf8 { .. } => "E_UTF8",
            Error::StoreCorrupt { .. } => "E_STORE_CORRUPT",
            Error::Version { .. } => "E_VERSION",
            Error::StoreWrite { .. } => "E_STORE_WRITE",
            Error::Io { .. } => "E_IO",
            Error::EmptyGroup => "E_EMPTY_GROUP",
            Error::NoAnnotations { .. } => "E_NO_ANNOTATIONS",
            Error::MissingScore { .. } => "E_MISSING_SCORE",
            Error::NoPairs => "E_NO_PAIRS",
            Error::Degenerate => "E_DEGENERATE",
            Error::Empty { .. } => "E_EMPTY",
            Error::NoOverlap { .. } => "E_NO_OVERLAP",
            Error::UnitMismatch => "E_UNIT_MISMATCH",
            Error::LengthMismatch { .. } => "E_LENGTH_MISMATCH",
            Error::TooShort { .. } => "E_TOO_SHORT",
            Error::SegmentMismatch { .. } => "E_SEGMENT_MISMATCH",
            Error::InsufficientPairs { .. } => "E_INSUFFICIENT_PAIRS",
            Error::NoMatches => "E_NO_MATCHES",
            Error::TooFew { .. } => "E_TOO_FEW",
            Error::PoolTooSmall { .. } => "E_POOL_TOO_SMALL",
            Error::UnknownAnnotator(_) => "E_UNKNOWN_ANNOTATOR",
            Error::UnknownTask(_) => "E_UNKNOWN_TASK",
            Error::WrongAnnotator { .. } => "E_WRONG_ANNOTATOR",
            Error::Validation { .. } => "E_VALIDATION",
        }
    }

    pub(crate) fn at_row(self, row: usize) -> Error {
        match self {
            Error::Row { .. } => self,
            other => Error::Row {
                row,
                source: Box::new(other),
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
