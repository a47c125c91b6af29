use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("reputation {rep} outside 0..={max}")]
    ReputationOutOfRange { rep: usize, max: usize },

    #[error("threshold {threshold} outside 0..={max}")]
    ThresholdOutOfRange { threshold: usize, max: usize },

    #[error("census has {got} buckets, expected {expected}")]
    CensusShape { expected: usize, got: usize },

    #[error("census sums to {got}, expected {expected}")]
    CensusTotal { expected: usize, got: usize },

    #[error("no user holds reputation {rep}")]
    EmptyBucket { rep: usize },

    #[error("belief row {row} sums to {sum}")]
    BeliefNotStochastic { row: usize, sum: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("configuration space has {size} states, cap is {cap}; reduce N or L")]
    StateSpaceTooLarge { size: usize, cap: usize },

    #[error("configuration with interior reputations is not bimodal")]
    NotBimodal,

    #[error("absorbing-set mismatch: analytic {analytic:?} vs numeric {numeric:?}")]
    AbsorbingMismatch {
        analytic: alloc::vec::Vec<usize>,
        numeric: alloc::vec::Vec<usize>,
    },

    #[error("chain is reducible: {unreachable} configurations do not communicate with the rest")]
    Reducible { unreachable: usize },

    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}
