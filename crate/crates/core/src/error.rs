use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("probability out of range [0, 1]: {0}")]
    ProbabilityOutOfRange(f64),

    #[error("corrupted belief: normalization constant is {0}")]
    CorruptedBelief(f64),

    #[error("degenerate likelihoods: {0}")]
    DegenerateLikelihoods(String),

    #[error("unsupported by this oracle: {0}")]
    UnsupportedOracle(String),

    #[error("enumeration depth {rounds} exceeds cap {cap}")]
    EnumerationTooDeep { rounds: usize, cap: usize },

    #[error("invalid proportion: {successes} successes out of {trials} trials")]
    InvalidProportion { successes: u64, trials: u64 },
}

pub type Result<T> = std::result::Result<T, SimError>;

pub(crate) fn check_probability(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(SimError::ProbabilityOutOfRange(p))
    }
}
