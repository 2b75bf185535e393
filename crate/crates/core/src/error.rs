use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("missing data exceeds threshold: {missing} of {len} points missing, longest gap {longest_run} steps")]
    MissingThresholdExceeded {
        missing: usize,
        len: usize,
        longest_run: usize,
    },
    #[error("series contains missing values; clean it first")]
    MissingValues,
    #[error("resolution factor {from}s -> {to}s is not a positive integer")]
    NonIntegerFactor { from: i64, to: i64 },
    #[error("series length {len} is not divisible by aggregation factor {factor}")]
    PartialBlock { len: usize, factor: usize },
    #[error("unsupported resolution: {0}s")]
    UnsupportedResolution(i64),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("MASE denominator is zero (in-sample series is constant within its season)")]
    DegenerateDenominator,
    #[error("empty input")]
    EmptyInput,
    #[error("insufficient history: need {needed} points, have {available}")]
    InsufficientHistory { needed: usize, available: usize },
    #[error("optimizer failed to converge: {0}")]
    NonConvergence(String),
    #[error("exogenous design is singular")]
    SingularDesign,
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("model requires exogenous regressors for the forecast horizon")]
    MissingExogenous,
    #[error("stepwise order search found no admissible model")]
    SearchExhausted,
    #[error("Fourier order K={k} too large for period {m} (need 2K < m)")]
    KTooLarge { k: usize, m: usize },
    #[error("invalid dimension: {0}")]
    InvalidDimension(usize),
    #[error("cannot normalize an all-zero weight vector")]
    ZeroWeightSum,
    #[error("search space has no dimensions")]
    EmptySpace,
    #[error("series too short: need at least 4 months, covers {start} .. {end}")]
    SeriesTooShort { start: String, end: String },
    #[error("{method} forecast at cutoff {cutoff} changed when later values were perturbed")]
    Leakage { method: String, cutoff: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
