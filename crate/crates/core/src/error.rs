use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: file is empty")]
    EmptyFile { path: PathBuf },

    #[error("{path}: row {row}, column {column} ({label}): {message}")]
    BadCell {
        path: PathBuf,
        row: usize,
        column: usize,
        label: String,
        message: String,
    },

    #[error("{path}: row {row} has {found} cells, expected {expected}")]
    RowWidth {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("duplicate label name `{0}`")]
    DuplicateLabel(String),

    #[error("empty label name at column {0}")]
    EmptyLabel(usize),

    #[error("label `{0}` (column {1}) has no tier assignment")]
    MissingTier(String, usize),

    #[error("tier file names unknown label `{0}`")]
    UnknownLabel(String),

    #[error("label `{label}` has invalid tier `{value}` (expected C, R or S)")]
    InvalidTier { label: String, value: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("label index {index} out of range for {len} labels")]
    InvalidIndex { index: usize, len: usize },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("graph is not a DAG: {0}")]
    NotADag(String),

    #[error("{unoriented} edge(s) left unoriented")]
    NotFullyOriented { unoriented: usize },

    #[error("orientation introduced a directed cycle")]
    CycleIntroduced,

    #[error("tier constraints leave no legal edge between any pair of labels")]
    NoLegalEdges,

    #[error("edge {from} -> {to} violates tier knowledge")]
    KnowledgeViolation { from: String, to: String },

    #[error("infeasible synthetic spec: {0}")]
    InfeasibleSpec(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable identifier printed by the CLI as `error[<name>]`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Io { .. } => "Io",
            Error::EmptyFile { .. } => "EmptyFile",
            Error::BadCell { .. } => "BadCell",
            Error::RowWidth { .. } => "RowWidth",
            Error::Format { .. } => "Format",
            Error::DuplicateLabel(_) => "DuplicateLabel",
            Error::EmptyLabel(_) => "EmptyLabel",
            Error::MissingTier(..) => "MissingTier",
            Error::UnknownLabel(_) => "UnknownLabel",
            Error::InvalidTier { .. } => "InvalidTier",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::InvalidIndex { .. } => "InvalidIndex",
            Error::SchemaMismatch(_) => "SchemaMismatch",
            Error::NotADag(_) => "NotADag",
            Error::NotFullyOriented { .. } => "NotFullyOriented",
            Error::CycleIntroduced => "CycleIntroduced",
            Error::NoLegalEdges => "NoLegalEdges",
            Error::KnowledgeViolation { .. } => "KnowledgeViolation",
            Error::InfeasibleSpec(_) => "InfeasibleSpec",
            Error::Json(_) => "Json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
