use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cyclic substitution: replacement for {target} mentions rewritten symbol {symbol}")]
    CyclicSubstitution { target: String, symbol: String },

    #[error("unbound symbols: {}", .0.join(", "))]
    UnboundSymbol(Vec<String>),

    #[error("keys from different families cannot be compared")]
    IncomparableKeys,

    #[error("index {0} repeated where distinct indices are required")]
    RepeatedIndex(u64),

    #[error("wrong number of slots: expected {expected}, got {got}")]
    SlotCount { expected: usize, got: usize },

    #[error("no constant row found for {0}")]
    NoConstantRow(String),

    #[error("point pattern {found:?} does not match table pattern {expected:?}")]
    PatternMismatch { expected: Vec<u32>, found: Vec<u32> },

    #[error("points {0} and {1} share coordinates; perturbing-the-world cannot separate duplicates")]
    DuplicatePointsUnsupported(u64, u64),

    #[error("index {0} is used for two different coordinate pairs")]
    InconsistentPoint(u64),

    #[error("both points carry index {0}")]
    SameIndex(u64),

    #[error("every row of the table vanished and no constant row exists")]
    Unresolved,

    #[error("numeric epsilon oracle failed to stabilize after {0} halvings")]
    NoStabilization(u32),

    #[error("unknown dialect {0:?}")]
    UnknownDialect(String),

    #[error("template error: {0}")]
    Template(String),

    #[error("generator parameters coincide: {0}")]
    DegenerateParameters(String),

    #[error("no degenerate-case generator for predicate {0}")]
    NoGenerator(String),

    #[error("mesh has no vertices")]
    EmptyMesh,

    #[error("mesh line {line}: {message}")]
    MeshParse { line: usize, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
