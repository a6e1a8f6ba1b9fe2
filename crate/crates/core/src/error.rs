use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised across the estimation pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: {what} has length {found}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("empty treatment arm: no {0} units")]
    EmptyGroup(&'static str),

    #[error("non-finite value in {what} at row {row}")]
    NonFinite { what: &'static str, row: usize },

    #[error("treatment indicator at row {row} is {value}, expected 0 or 1")]
    InvalidTreatment { row: usize, value: f64 },

    #[error("invalid covariate names: {0}")]
    InvalidNames(String),

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("dimension mismatch: expected {expected} covariates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid estimand: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("every control unit was trimmed")]
    AllControlsTrimmed,

    #[error("control weights sum to zero")]
    ZeroControlMass,

    #[error("a {0} group carries zero total weight")]
    ZeroWeightGroup(&'static str),

    #[error("bootstrap replicate {replicate} still degenerate after {redraws} redraws")]
    DegenerateBootstrap { replicate: usize, redraws: usize },

    #[error("simulation replicate {replicate} failed: {source}")]
    Replicate {
        replicate: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures caused by an unlucky resample rather than by the input.
    pub fn is_degenerate_sample(&self) -> bool {
        matches!(
            self,
            Error::EmptyGroup(_)
                | Error::AllControlsTrimmed
                | Error::ZeroControlMass
                | Error::RankDeficient
        )
    }
}
