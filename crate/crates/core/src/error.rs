use std::path::PathBuf;

use thiserror::Error;

use crate::problem::Operand;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("unsupported bit-width {bits} (expected 2..=16)")]
    InvalidWidth { bits: u32 },
    #[error("matrix must have positive dimensions, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },
    #[error("problem dimensions must be positive, got m={m} n={n} p={p}")]
    EmptyDimension { m: usize, n: usize, p: usize },
    #[error("{rows}x{cols} matrix needs {} elements, got {len}", rows * cols)]
    DataLength { rows: usize, cols: usize, len: usize },
    #[error("row {row} has {found} elements, expected {expected}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("dimension mismatch: {constraint} violated ({left} != {right})")]
    DimensionMismatch {
        constraint: &'static str,
        left: usize,
        right: usize,
    },
    #[error("{operand}[{row}][{col}] = {value} is outside the {width}-bit range [{min}, {max}]")]
    OutOfRange {
        operand: Operand,
        row: usize,
        col: usize,
        value: i64,
        width: u32,
        min: i64,
        max: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("output width of {bits} bits is narrower than the {width}-bit operands")]
    OutputWidthTooNarrow { bits: u32, width: u32 },
    #[error("output cell ({row}, {col}) overflowed a {bits}-bit register at cycle {cycle}: value {value}")]
    Overflow {
        row: usize,
        col: usize,
        cycle: u64,
        value: i64,
        bits: u32,
    },
    #[error("cell ({row}, {col}) is outside the {rows}x{cols} output")]
    CellOutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
}

/// Malformed problem text/JSON. Line numbers are 1-based; JSON errors report
/// the line serde_json points at.
#[derive(Debug, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
    /// Set when the file is well-formed but describes an invalid problem.
    pub invalid: Option<ValidationError>,
}

impl ParseError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
            invalid: None,
        }
    }

    pub(crate) fn invalid(line: usize, err: ValidationError) -> Self {
        ParseError {
            line,
            message: err.to_string(),
            invalid: Some(err),
        }
    }
}

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("bad magic {found:?}, expected \"TUGW\"")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported element width {bits} bits (expected 8, 16 or 32)")]
    ElementWidth { bits: u8 },
    #[error("unsupported rank {rank} (expected 1..=4)")]
    Rank { rank: u8 },
    #[error("header field {field} must be {expected}, found {found}")]
    Header {
        field: &'static str,
        expected: u64,
        found: u64,
    },
    #[error("dump is {found} bytes, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error("dimension {dim} of size {size} does not fit the u16 header field")]
    DimTooLarge { dim: usize, size: usize },
    #[error("value {value} does not fit a {bits}-bit element")]
    ValueTooWide { value: i64, bits: u8 },
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("workload source contains no tensors")]
    EmptySource,
    #[error("tensor {tensor}: element {index} = {value} is outside the {width}-bit range")]
    OutOfRange {
        tensor: usize,
        index: usize,
        value: i64,
        width: u32,
    },
    #[error("cannot merge statistics profiled at {left} and {right} bits")]
    WidthMismatch { left: u32, right: u32 },
}

/// Failure loading a file from disk, tagged with the path.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("{}: {source}", path.display())]
    Dump {
        path: PathBuf,
        #[source]
        source: DumpError,
    },
    #[error("{}: {source}", path.display())]
    Validation {
        path: PathBuf,
        #[source]
        source: ValidationError,
    },
}

/// Any failure surfaced by the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("{}: {source}", path.display())]
    ProfileFile {
        path: PathBuf,
        #[source]
        source: ProfileError,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}
