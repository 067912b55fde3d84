use thiserror::Error;

/// Errors raised while loading or validating tables.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("table {table}: csv error: {message}")]
    Csv { table: String, message: String },
    #[error("table {table}: missing header row")]
    MissingHeader { table: String },
    #[error("table {table}: row {row} has {found} cells, expected {expected}")]
    RaggedRow {
        table: String,
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("table {table}: duplicate column name {column:?}")]
    DuplicateColumn { table: String, column: String },
    #[error("table {table}: unknown column {column:?} in candidate key")]
    UnknownKeyColumn { table: String, column: String },
    #[error("table {table}: candidate key must name at least one column")]
    EmptyKey { table: String },
    #[error("table {table}: key {key:?} is violated by rows {first} and {second}")]
    KeyViolation {
        table: String,
        key: Vec<String>,
        first: usize,
        second: usize,
    },
    #[error("duplicate table identifier {0:?}")]
    DuplicateTable(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

/// Static problems with an expression, found before evaluation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValidationError {
    #[error("unknown table {0:?}")]
    UnknownTable(String),
    #[error("table {table}: unknown column {column:?}")]
    UnknownColumn { table: String, column: String },
    #[error("table {table}: predicate columns {columns:?} do not form a candidate key")]
    NotACandidateKey { table: String, columns: Vec<String> },
    #[error("variable v{index} out of range for arity {arity}")]
    VarOutOfRange { index: usize, arity: usize },
}

/// Runtime failures of program evaluation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("position is undefined on {subject:?}")]
    PositionUndefined { subject: String },
    #[error("no row of {table} matches {values:?}")]
    NoMatchingRow { table: String, values: Vec<String> },
    #[error("inverted substring range {start}..{end}")]
    InvertedRange { start: usize, end: usize },
    #[error("variable v{index} out of range for arity {arity}")]
    VarOutOfRange { index: usize, arity: usize },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// Surface-syntax parse failure, with the character offset where it happened.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

/// Failures of the synthesis loop.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthesisError {
    #[error("no examples given")]
    NoExamples,
    #[error("example {index} has {found} inputs, expected {expected}")]
    ArityMismatch {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("conflicting examples: rows {first} and {second} have the same inputs but different outputs")]
    ConflictingExamples { first: usize, second: usize },
    #[error("no program found: example {example} emptied the version space")]
    NoProgramFound { example: usize },
}
