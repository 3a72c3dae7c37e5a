use thiserror::Error;

/// Errors raised across the model, sampling, oracle and experiment layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid key parameters K={k}, P={p}: need 1 <= K <= P")]
    InvalidKeyParams { k: u64, p: u64 },

    #[error("channel probability {0} is outside the allowed interval")]
    InvalidAlpha(f64),

    #[error("transmission range {0} must lie in (0, 0.5)")]
    InvalidRho(f64),

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("no key-ring size satisfies the threshold: (1/alpha)(log n)/n = {bound} >= 1")]
    NoThreshold { bound: f64 },

    #[error("infeasible scaling at n={n}: best achievable c_n={achieved} is not within 10% of c={target}")]
    Infeasible { n: usize, target: f64, achieved: f64 },

    #[error("exhaustive enumeration needs {needed} iterations, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("graph dimension mismatch: {0} vs {1} vertices")]
    DimensionMismatch(usize, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
