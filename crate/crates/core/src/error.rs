use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("pmf matrix is empty")]
    EmptyMatrix,
    #[error("pmf row {row} has {found} entries, expected {expected}")]
    NotRectangular { row: usize, expected: usize, found: usize },
    #[error("pmf entry ({x}, {y}) is not finite")]
    NonFinite { x: usize, y: usize },
    #[error("pmf entry ({x}, {y}) is negative: {value}")]
    NegativeEntry { x: usize, y: usize, value: f64 },
    #[error("pmf mass deviates from 1 by {deviation:e}")]
    MassDeviationTooLarge { deviation: f64 },
    #[error("{axis} alphabet has {found} labels but the pmf has {expected} {axis} symbols")]
    LabelCount {
        axis: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("alphabet of size {size} exceeds the cap {cap}")]
    AlphabetTooLarge { size: usize, cap: usize },
    #[error("graph with {vertices} vertices exceeds the cap {cap}")]
    GraphTooLarge { vertices: usize, cap: usize },
    #[error("enumeration of {count} maps exceeds the cap {cap}")]
    EnumerationTooLarge { count: f64, cap: f64 },
    #[error("grid oracle not applicable: {0}")]
    OracleTooLarge(String),
    #[error("no feasible channel found (best residual {residual:e})")]
    Infeasible { residual: f64 },
    #[error("t = {t} is outside the feasible range [0, {max}]")]
    InfeasibleT { t: f64, max: f64 },
    #[error("point violates the outer bound inequality {name} by {amount:e}")]
    OuterBoundViolated { name: String, amount: f64 },
    #[error("epsilon {epsilon} exceeds the admissible maximum {max}")]
    EpsilonTooLarge { epsilon: f64, max: f64 },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid cycle: {0}")]
    InvalidCycle(String),
    #[error("condition not met: {0}")]
    ConditionNotMet(String),
    #[error("pmf is not a product distribution (max deviation {deviation:e})")]
    NotIndependent { deviation: f64 },
    #[error("ratio is undefined: I(Y;U) vanishes for every admissible U")]
    DegenerateRatio,
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
