use thiserror::Error;

/// Errors raised by the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid multi-index: {0}")]
    InvalidMultiIndex(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("operands live on different charts")]
    ChartMismatch,

    #[error("axis {axis} out of range for complex dimension {n}")]
    AxisOutOfRange { axis: usize, n: usize },

    #[error("band limit {band} must be below half the smallest resolution {resolution}")]
    BandTooLarge { band: usize, resolution: usize },

    #[error("bidegree mismatch: ({0}, {1}) vs ({2}, {3})")]
    BidegreeMismatch(usize, usize, usize, usize),

    #[error("invalid bidegree ({p}, {q}) in complex dimension {n}")]
    InvalidBidegree { p: usize, q: usize, n: usize },

    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),

    #[error("metric is not hermitian positive-definite at point {point}: {reason}")]
    InvalidMetric { point: usize, reason: String },

    #[error("{what}: evaluation routes disagree ({a} vs {b}, relative gap {rel:.3e})")]
    RouteMismatch {
        what: &'static str,
        a: String,
        b: String,
        rel: f64,
    },

    #[error("invalid Higgs instance: {0}")]
    InvalidInstance(String),

    #[error("Higgs field is not holomorphic: |D''phi| = {holomorphy:.3e}, |[phi_a, phi_b]| = {commutator:.3e}")]
    NotHolomorphic { holomorphy: f64, commutator: f64 },

    #[error("Hodge-system chain condition violated between blocks {0} and {1}")]
    ChainCondition(usize, usize),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("field is not su(2)-valued: {0}")]
    NotSu2(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed container: {0}")]
    Container(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
