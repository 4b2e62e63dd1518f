use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix is not square ({0}x{1})")]
    NonSquare(usize, usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not a unit: {0}")]
    NotAUnit(String),
    #[error("invalid move: {0}")]
    InvalidMove(String),
    #[error("word is not normal: {0}")]
    NotNormal(String),
    #[error("word is not essential: {0}")]
    NotEssential(String),
    #[error("word has uniform sign, no Macaulayfying element needed")]
    UniformSignWord,
    #[error("stage check failed: {0}")]
    StageCheckFailed(String),
    #[error("sign propagation inconsistent: {0}")]
    Inconsistent(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("enumeration incomplete at max_len {0}")]
    Incomplete(usize),
    #[error("invalid index {0}")]
    InvalidIndex(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
