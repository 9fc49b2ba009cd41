//! Dataset ingestion, schema inference, holdout splitting, and reversible
//! encoding of mixed-type rows into discrete category/bin indices.

mod csv_io;
pub(crate) mod encode;
mod schema;
mod split;

pub use csv_io::{load_csv, load_csv_reader, write_csv, SchemaHint};
pub use encode::{build_encoder, decode_row, encode_dataset, encode_row, EncodedRow};
pub use schema::{ColumnKind, ColumnSpec, Dataset, TableSchema, Value, DEFAULT_MISSING_TOKEN};
pub use split::split_holdout;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: row has {got} fields, header has {expected}")]
    RaggedRow {
        line: u64,
        expected: usize,
        got: usize,
    },
    #[error("schema hint references unknown column `{0}`")]
    UnknownHintColumn(String),
    #[error("column `{column}`, line {line}: `{cell}` is not numeric")]
    NumericParse {
        column: String,
        line: u64,
        cell: String,
    },
    #[error("n_train must be in 1..={rows}, got {n_train}")]
    SplitOutOfRange { n_train: usize, rows: usize },
    #[error("cannot build an encoder from an empty dataset")]
    EmptyTrainingData,
    #[error("numeric column `{0}` has no non-missing values")]
    AllMissingNumeric(String),
    #[error("threshold for unknown column `{0}`")]
    UnknownThresholdColumn(String),
    #[error("threshold on non-numeric column `{0}`")]
    ThresholdOnCategorical(String),
    #[error("column `{column}`: label `{label}` is not in the vocabulary")]
    UnseenLabel { column: String, label: String },
    #[error("column `{column}`: expected a {expected} value")]
    ValueKindMismatch {
        column: String,
        expected: &'static str,
    },
    #[error("column `{column}`: non-finite numeric value")]
    NonFiniteValue { column: String },
    #[error("column `{column}`: index {index} out of range for vocabulary of {size}")]
    IndexOutOfRange {
        column: String,
        index: usize,
        size: usize,
    },
    #[error("row has {got} values, schema has {expected} columns")]
    RowWidthMismatch { expected: usize, got: usize },
    #[error("target column `{0}` does not exist")]
    UnknownTargetColumn(String),
    #[error("target column `{0}` must be categorical")]
    NonCategoricalTarget(String),
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
}
