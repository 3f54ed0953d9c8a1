use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped so the CLI can map them onto its exit-code
/// contract: configuration/contract problems, budget exhaustion, and
/// numerical non-convergence are distinguishable.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid system: {0}")]
    Validation(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("group variant mismatch: {0}")]
    VariantMismatch(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("constraint set is empty: {0}")]
    EmptyConstraint(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code the CLI maps this error to (2 config, 3 budget,
    /// 4 numerical).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::Validation(_)
            | Error::Dimension(_)
            | Error::VariantMismatch(_)
            | Error::Unsupported(_)
            | Error::Io(_) => 2,
            Error::Budget(_) => 3,
            Error::NonConvergence(_) | Error::EmptyConstraint(_) => 4,
        }
    }

    /// Short machine-readable category name for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::Dimension(_) => "dimension",
            Error::VariantMismatch(_) => "variant",
            Error::Budget(_) => "budget",
            Error::NonConvergence(_) => "non-convergence",
            Error::EmptyConstraint(_) => "empty-constraint",
            Error::Unsupported(_) => "unsupported",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
