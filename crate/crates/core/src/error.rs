use thiserror::Error;

use crate::exact::SolveResult;
use crate::instance::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported field order {0}: expected a prime <= 251 or one of 4, 8, 9, 16, 25, 27")]
    UnsupportedOrder(u32),

    #[error("division by zero")]
    DivideByZero,

    #[error("element {value} is out of range for GF({q})")]
    ElementOutOfRange { value: u32, q: u32 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("field mismatch: GF({left}) vs GF({right})")]
    FieldMismatch { left: u32, right: u32 },

    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: String,
        budget: u64,
    },

    /// Exact search gave up; carries the best solution found so far.
    #[error("search budget exceeded after {} subspaces; OPT in [{}, {}]", .0.subspaces_examined, .0.lower_bound, .0.opt)]
    SearchBudgetExceeded(Box<SolveResult>),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(ValidationReport),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("unknown builtin instance {0:?}")]
    UnknownBuiltin(String),

    #[error("instance is not normalized: client {0} wants more than one packet")]
    NotNormalized(usize),

    #[error("block {0} of the partition is not a clique")]
    NotAClique(usize),

    #[error("degenerate instance: every client already has all packets")]
    DegenerateInstance,

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("vertex {0} is isolated")]
    IsolatedVertex(usize),

    #[error("coloring uses {used} colors but GF({q}) supports at most {}", .q + 1)]
    TooManyColors { used: usize, q: u32 },

    #[error("coloring is not proper: edge ({0}, {1}) is monochromatic")]
    ImproperColoring(usize, usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::SearchBudgetExceeded(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
