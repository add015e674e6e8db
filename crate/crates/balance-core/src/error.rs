use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum BalanceError {
    #[error("invalid tensor: {0}")]
    InvalidTensor(String),

    #[error("label rows have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("cannot draw {pairs} disjoint pairs from {hypotheses} hypotheses")]
    NotEnoughHypotheses { pairs: usize, hypotheses: usize },

    #[error("{configs} label configurations exceed the enumeration cap of {cap}")]
    EnumerationCap { configs: u128, cap: u64 },

    #[error("pool is empty")]
    EmptyPool,

    #[error("batch size {batch} exceeds pool size {pool}")]
    BatchTooLarge { batch: usize, pool: usize },

    #[error("candidate subset of {subset} points cannot host {clusters} clusters")]
    SubsetTooSmall { subset: usize, clusters: usize },

    #[error("observation has zero likelihood under every hypothesis")]
    InconsistentObservation,

    #[error("noise-free criterion called with noisy likelihoods")]
    NoisyLikelihoods,

    #[error("query budget of {cap} exhausted before reaching the target diameter")]
    BudgetExhausted { cap: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("tensor format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BalanceError>;
