use thiserror::Error;

use crate::methods::MethodId;
use crate::solvers::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("exact enumeration needs p <= {max}, got p = {p}")]
    DimensionTooLarge { p: usize, max: usize },

    #[error("non-finite value in input")]
    NonFinite,

    #[error("variable {0} is constant, its correlation is undefined")]
    ConstantColumn(usize),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("input admits no positive definite solution (nonpositive diagonal)")]
    NonPositiveDefiniteInput,

    #[error("{solver} did not converge after {} iterations (last change {:.3e})", report.iterations, report.final_delta)]
    NotConverged { solver: &'static str, report: SolveReport },

    #[error("index ({k}, {l}) out of range for p = {p}")]
    IndexOutOfRange { k: usize, l: usize, p: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid lambda grid: {0}")]
    InvalidGrid(String),

    #[error("{0} does not support this operation")]
    UnsupportedMethod(MethodId),

    #[error("reference matrix has no nonzero off-diagonal entry")]
    NoTrueEdges,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("non-binary value {value:?} at line {line}, column {column}")]
    NonBinaryValue { line: usize, column: usize, value: String },

    #[error("duplicate variable name {0:?}")]
    DuplicateName(String),

    #[error("{method} failed at lambda = {lambda:.6e}{}: {source}", node.map(|k| format!(" (node {k})")).unwrap_or_default())]
    Solver {
        method: MethodId,
        lambda: f64,
        node: Option<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable identifier printed by the command-line tool.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionTooLarge { .. } => "DimensionTooLarge",
            Error::NonFinite => "NonFinite",
            Error::ConstantColumn(_) => "ConstantColumn",
            Error::NotPositiveDefinite => "NotPositiveDefinite",
            Error::NonPositiveDefiniteInput => "NonPositiveDefiniteInput",
            Error::NotConverged { .. } => "NotConverged",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::UnsupportedMethod(_) => "UnsupportedMethod",
            Error::NoTrueEdges => "NoTrueEdges",
            Error::Parse { .. } => "ParseError",
            Error::NonBinaryValue { .. } => "NonBinaryValue",
            Error::DuplicateName(_) => "DuplicateName",
            Error::Solver { source, .. } => source.code(),
            Error::Config(_) => "ConfigError",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Io(_) => "IoError",
            Error::Csv(_) => "CsvError",
        }
    }
}
