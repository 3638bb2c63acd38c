use thiserror::Error;

use crate::poly::SymbolId;
use crate::tree::ValidationReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("symbol {0:?} has no assigned value")]
    UnboundSymbol(SymbolId),

    #[error("duplicate symbol name `{0}`")]
    DuplicateSymbol(String),

    #[error("parse error at byte {pos}: {message}")]
    Parse { pos: usize, message: String },

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("vertices `{0}` and `{1}` are not in the same stage")]
    NotSameStage(String, String),

    #[error("symbol `{0}` is not an atomic probability of this tree")]
    ForeignSymbol(String),

    #[error("invalid simplex point: {0}")]
    InvalidSimplexPoint(String),

    #[error("expected a point of length {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("probability of vertex `{0}` evaluates to zero")]
    ZeroDenominator(String),

    #[error("invalid staged tree:\n{0}")]
    Validation(ValidationReport),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
