use thiserror::Error;

/// Errors raised by the workbook model, its file formats and diffs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SheetError {
    #[error("unknown sheet {0:?}")]
    UnknownSheet(String),

    #[error("duplicate sheet name {0:?}")]
    DuplicateSheet(String),

    #[error("invalid sheet name {0:?}")]
    InvalidSheetName(String),

    #[error("malformed range at {token:?}: {reason}")]
    BadRange { token: String, reason: String },

    #[error("invalid cell value: {0}")]
    InvalidValue(String),

    #[error("out of grid bounds: {0}")]
    OutOfBounds(String),

    #[error("workbook must keep at least one sheet")]
    LastSheet,

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("malformed workbook JSON: {0}")]
    Json(String),

    #[error("diff does not apply: {0}")]
    DiffMismatch(String),
}
