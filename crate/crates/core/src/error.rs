use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed JSON in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("header mismatch at column {column}: expected `{expected}`, found `{found}`")]
    HeaderMismatch {
        column: usize,
        expected: String,
        found: String,
    },

    #[error("cannot parse `{value}` as {expected} at row {row}, column `{column}`")]
    Parse {
        row: usize,
        column: String,
        value: String,
        expected: String,
    },

    #[error("dataset has no data rows")]
    EmptyDataset,

    #[error("unsupported dataset format `{0}`: only plaintext CSV can be ingested")]
    UnsupportedFormat(String),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("index {index} out of range for {len} rows")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("hierarchy for `{attribute}` maps `{value}` to both `{first}` and `{second}` at level {level}")]
    NonFunctionalMapping {
        attribute: String,
        value: String,
        level: usize,
        first: String,
        second: String,
    },

    #[error("hierarchy for `{attribute}` is not monotone: label `{label}` at level {level} splits into `{first}` and `{second}`")]
    NonMonotone {
        attribute: String,
        label: String,
        level: usize,
        first: String,
        second: String,
    },

    #[error("interval hierarchy for `{attribute}` has a gap at level {level} between {hi} and {next_lo}")]
    RangeGap {
        attribute: String,
        level: usize,
        hi: f64,
        next_lo: f64,
    },

    #[error("interval hierarchy for `{attribute}` has overlapping ranges at level {level} around {at}")]
    RangeOverlap { attribute: String, level: usize, at: f64 },

    #[error("invalid hierarchy for `{attribute}`: {reason}")]
    InvalidHierarchy { attribute: String, reason: String },

    #[error("value `{value}` at row {row}, column `{column}` is not covered by its hierarchy")]
    UnmappedValue { row: usize, column: String, value: String },

    #[error("no hierarchy supplied for quasi-identifier `{0}`")]
    MissingHierarchy(String),

    #[error("invalid generalization scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("attribute `{0}` does not have the sensitive role")]
    AttributeNotSensitive(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("equivalence class {key} is absent from the population")]
    ClassNotInPopulation { key: String },

    #[error("row count mismatch: original has {original} rows, anonymized has {anonymized}")]
    RowCountMismatch { original: usize, anonymized: usize },

    #[error("dataset has no quasi-identifier attributes")]
    NoQuasiIdentifiers,

    #[error("attribute `{0}` has no values")]
    ZeroDistinct(String),

    #[error("no lattice node satisfies the constraints within the suppression budget ({evaluated} nodes evaluated)")]
    NoSolution { evaluated: usize },

    #[error("lattice node was produced for a different dataset")]
    StaleNode,

    #[error("unknown ontology node `{0}`")]
    UnknownNode(String),

    #[error("unknown property `{property}` for `{subject}`: {reason}")]
    UnknownProperty {
        subject: String,
        property: String,
        reason: String,
    },

    #[error("`{name}` is a {found}, expected a {expected}")]
    WrongClass {
        name: String,
        expected: String,
        found: String,
    },

    #[error("invalid knowledge graph: {0}")]
    InvalidGraph(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}
