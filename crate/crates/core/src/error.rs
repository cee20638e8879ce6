use crate::elg::OptimizationResult;

/// Errors raised across the crate. Messages name the violated invariant so a
/// failed validation can be traced to the specific offending entry.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("model needs at least 2 assets, got {m}")]
    TooFewAssets { m: usize },

    #[error("model needs at least 1 atom")]
    NoAtoms,

    #[error("atom matrix row {atom} has {got} entries, expected {expected}")]
    AtomWidth {
        atom: usize,
        got: usize,
        expected: usize,
    },

    #[error("probability {value} at atom {atom} is negative")]
    NegativeProbability { atom: usize, value: f64 },

    #[error("probability sum {sum} is not 1 (tolerance {tol})")]
    ProbabilitySum { sum: f64, tol: f64 },

    #[error("probability count {got} does not match atom count {expected}")]
    ProbabilityCount { got: usize, expected: usize },

    #[error("return not > -1: atom {atom}, asset {asset}, value {value}")]
    ReturnNotAboveMinusOne {
        atom: usize,
        asset: usize,
        value: f64,
    },

    #[error("return not finite: atom {atom}, asset {asset}")]
    ReturnNotFinite { atom: usize, asset: usize },

    #[error("riskless index {index} out of range for {m} assets")]
    RisklessIndexOutOfRange { index: usize, m: usize },

    #[error("riskless rate {rate} is negative")]
    NegativeRisklessRate { rate: f64 },

    #[error(
        "riskless column {asset} is not constant: atom {atom} has {value}, atom 0 has {rate}"
    )]
    RisklessColumnInconsistent {
        asset: usize,
        atom: usize,
        value: f64,
        rate: f64,
    },

    #[error("asset index {index} out of range for {m} assets")]
    AssetIndexOutOfRange { index: usize, m: usize },

    #[error("weight {value} at index {index} is negative")]
    NegativeWeight { index: usize, value: f64 },

    #[error("weight sum {sum} is not 1 (tolerance {tol})")]
    WeightSum { sum: f64, tol: f64 },

    #[error("weight vector has {got} entries, expected {expected}")]
    WeightLength { got: usize, expected: usize },

    #[error("horizon must be >= 1")]
    HorizonZero,

    #[error("delta_t {value} must be positive and finite")]
    NonpositiveDeltaT { value: f64 },

    #[error("enumeration size {required} exceeds budget {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("Monte Carlo needs at least 2 samples, got {samples}")]
    TooFewSamples { samples: u64 },

    #[error("optimizer did not reach tolerance within {iterations} iterations (gap {gap})")]
    Unconverged {
        iterations: usize,
        gap: f64,
        best: Box<OptimizationResult>,
    },

    #[error("scan horizon {horizon} did not converge")]
    ScanUnconverged { horizon: usize },

    #[error("asset {asset} is not dominant at tolerance {tolerance}")]
    NotDominant { asset: usize, tolerance: f64 },

    #[error("dominant-asset weight k_j = {value} must lie in {range}")]
    WeightOutOfRange { value: f64, range: &'static str },

    #[error("epsilon {epsilon} must lie in (0, {limit})")]
    EpsilonOutOfRange { epsilon: f64, limit: f64 },

    #[error("degenerate bound: k_j = 1 makes the bound identically zero")]
    DegenerateBound,

    #[error("n_max must be >= 2, got {n_max}")]
    NMaxTooSmall { n_max: usize },

    #[error("improved upper bound {improved} exceeds baseline {baseline}")]
    BoundOrdering { improved: f64, baseline: f64 },

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("tick file line {line}: {message}")]
    TickParse { line: usize, message: String },

    #[error("tick file line {line}: price {value} is not positive")]
    NonpositivePrice { line: usize, value: f64 },

    #[error("tick file line {line}: timestamp decreases")]
    DecreasingTimestamp { line: usize },

    #[error("need at least {need} ticks, got {got}")]
    TooFewTicks { need: usize, got: usize },

    #[error("return series is empty")]
    EmptySeries,

    #[error("series length {len} is shorter than window {window}")]
    SeriesShorterThanWindow { window: usize, len: usize },

    #[error("window must be >= 1")]
    WindowZero,

    #[error("initial account value {value} must be positive")]
    NonpositiveInitialValue { value: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
