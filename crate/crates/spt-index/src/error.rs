//! Error taxonomy shared by every module.
//!
//! The pipeline distinguishes *input* problems (bad tables, unnormalized
//! cocycles, mismatched chains) from *mathematical* failures (an operator that
//! should be diagonal or scalar is not). The latter carry witnesses so a
//! failing run can be reproduced from the report alone.

use thiserror::Error;

/// A violated group law together with the witnessing tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupViolation {
    /// `mult[0][a] != a` or `mult[a][0] != a`.
    Identity { a: usize },
    /// No b with `a·b = b·a = e`.
    Inverse { a: usize },
    /// `(a·b)·c != a·(b·c)`.
    Associativity { a: usize, b: usize, c: usize },
    /// Entry out of range or ragged table.
    Shape { row: usize, col: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group order {0}")]
    InvalidOrder(usize),

    #[error("group order {order} exceeds the configured cap {cap}")]
    OrderCap { order: usize, cap: usize },

    #[error("malformed multiplication table: {0:?}")]
    MalformedTable(GroupViolation),

    #[error("group law violated: {0:?}")]
    GroupLaw(GroupViolation),

    #[error("groups differ where they must agree")]
    GroupMismatch,

    #[error("level {level} out of range for order {order}")]
    LevelOutOfRange { level: usize, order: usize },

    #[error(
        "cocycle identity fails at ({g},{h},{k},{l}); residual exponent {residual}"
    )]
    NotCocycle { g: usize, h: usize, k: usize, l: usize, residual: String },

    #[error("cochain is not normalized: entry {0} at an identity argument is nontrivial")]
    NotNormalized(String),

    #[error("phase with zero denominator")]
    ZeroDenominator,

    #[error("register {reg} out of range for chain with {count} registers")]
    RegisterOutOfRange { reg: usize, count: usize },

    #[error("link factor at register {0} crosses a block boundary")]
    LinkAcrossBlocks(usize),

    #[error("phase table has {got} entries, expected {expected}")]
    TableSize { got: usize, expected: usize },

    #[error("operators live on different chains")]
    ChainMismatch,

    #[error("chain geometry invalid: {0}")]
    ChainGeometry(String),

    #[error("operator is not diagonal: configuration {config:?} is moved to {moved:?}")]
    NotDiagonal { config: Vec<usize>, moved: Vec<usize> },

    #[error("diagonal operator does not factor over registers; witness configuration {witness:?}")]
    NotFactorizable { witness: Vec<usize> },

    #[error("scalar expected, but phase differs between configurations {first:?} and {second:?}")]
    NotScalar { first: Vec<usize>, second: Vec<usize> },

    #[error("exhaustive scan budget exceeded: {0} configurations")]
    BudgetExceeded(u128),

    #[error("counterterm window violated: residual support {support:?} meets window {window:?}")]
    SupportWindow { support: Vec<usize>, window: Vec<usize> },

    #[error("index extraction failed: {0}")]
    ExtractionFailed(String),

    #[error("invariance broken by varied choice: {0}")]
    InvarianceBroken(String),

    /// A microscopic model property (representation, invariance, global
    /// symmetry) failed to hold.
    #[error("model check failed: {0}")]
    ModelCheckFailed(String),

    #[error("coboundary system has no solution: classes are distinct")]
    DistinctClasses,

    #[error("internal inconsistency (bug): {0}")]
    Internal(String),

    #[error("patch geometry invalid: {0}")]
    PatchGeometry(String),

    #[error("compensation failed: {0}")]
    CompensationFailed(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
