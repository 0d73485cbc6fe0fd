use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("{section}: header declares {expected} entries but {found} were given")]
    CountMismatch {
        section: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("line {line}: undeclared {kind} id `{id}`")]
    UnknownId {
        kind: &'static str,
        id: String,
        line: usize,
    },

    #[error("line {line}: {what} {value} out of range (must be < {bound})")]
    OutOfRange {
        line: usize,
        what: &'static str,
        value: usize,
        bound: usize,
    },

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("inapplicable move: {0}")]
    InapplicableMove(String),

    #[error("no applicable move found after {0} attempts")]
    ExhaustedNeighborhood(usize),

    #[error("search space of {size} assignments exceeds the limit of {limit}")]
    SpaceTooLarge { size: u128, limit: u128 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("empty sample")]
    EmptySample,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("solution line {line}: {msg}")]
    Solution { line: usize, msg: String },
}
