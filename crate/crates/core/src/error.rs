use thiserror::Error;

/// Errors raised by the operators, checkers and variational tooling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{a}, {b}]: need finite a < b")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("parse error at position {pos}: expected {expected}")]
    Parse { pos: usize, expected: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("x = {x} lies outside [{a}, {b}]")]
    OutOfInterval { x: f64, a: f64, b: f64 },

    #[error("x = {x} is not a grid node (sampled functions are node-only)")]
    OffNode { x: f64 },

    #[error("unsupported order alpha = {alpha}: {reason}")]
    UnsupportedOrder { alpha: f64, reason: String },

    #[error("function is not smooth enough: {0}")]
    NotSmooth(String),

    #[error("grid does not match the function's interval or point count")]
    GridMismatch,

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("boundary condition violated at {side}: expected {expected}, got {got}")]
    BoundaryCondition {
        side: &'static str,
        expected: f64,
        got: f64,
    },

    #[error("divergent boundary term: {0}")]
    DivergentBoundary(String),
}

pub type Result<T> = std::result::Result<T, Error>;
