use thiserror::Error;

/// Errors raised by model construction, simulation and the numerical oracles.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown model kind `{0}` (expected lazy-simple, simple or stable:<alpha>)")]
    UnknownModel(String),

    #[error("stable index alpha = {0} outside (0, 2)")]
    AlphaOutOfRange(f64),

    #[error("{0} model is only available in dimension 1 (got d = {1})")]
    UnsupportedDimension(&'static str, usize),

    #[error("dimension d = {0} outside the supported range 1..=3")]
    DimensionOutOfRange(usize),

    #[error("condition d < αp violated: d = {d}, α = {alpha}, p = {p}")]
    Criticality { d: usize, alpha: f64, p: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("occupation measures have mismatched horizons ({0} vs {1})")]
    HorizonMismatch(usize, usize),

    #[error("parity violation: sum of squares {l2sum} and diagonal {diagonal} have different parity")]
    Parity { l2sum: u128, diagonal: u128 },

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("lattice coordinate {0} exceeds the packing range ±{1}")]
    PackingRange(i64, i64),

    #[error("enumeration budget exceeded: {outcomes} outcomes > {budget}")]
    BudgetExceeded { outcomes: u128, budget: u128 },

    #[error("model has an infinite step support; exact enumeration unavailable")]
    InfiniteSupport,

    #[error("step characteristic function must be nonnegative for this check")]
    NotNonnegative,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
