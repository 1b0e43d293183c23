use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = SotmError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SotmError {
    #[error("variable `{0}` has zero variance over the pooled data")]
    ZeroVarianceVariable(String),
    #[error("standardization needs at least two pooled rows, got {0}")]
    TooFewRows(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid panel: {0}")]
    InvalidPanel(String),
    #[error("missing value for variable `{variable}` at entity `{entity}`, time `{time}`")]
    MissingValue {
        entity: String,
        time: String,
        variable: String,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("slice at time `{0}` is empty")]
    EmptySlice(String),
    #[error("degenerate slice: all vectors are identical")]
    DegenerateSlice,
    #[error("all map units are identical")]
    AllUnitsIdentical,
    #[error("model and panel do not match: {0}")]
    MismatchedPanel(String),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("unsupported model schema version {found} (expected {expected})")]
    SchemaVersionMismatch { found: u32, expected: u32 },
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SotmError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SotmError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the file system rather than of the data.
    pub fn is_io(&self) -> bool {
        match self {
            SotmError::Io { .. } => true,
            SotmError::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}
