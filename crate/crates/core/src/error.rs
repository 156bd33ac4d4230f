use thiserror::Error;

/// Errors produced by the group arithmetic, representation and rate-function layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular input: factor {factor} has condition number {cond:.3e} (limit {limit:.1e})")]
    SingularInput { factor: usize, cond: f64, limit: f64 },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("group/representation mismatch: {0}")]
    MismatchedGroup(String),

    #[error("not a state: {0}")]
    NotAState(String),

    #[error("weight is not dominant: {0}")]
    NotDominant(String),

    #[error("tensor power {m} exceeds the configured maximum {max}")]
    TooLarge { m: usize, max: usize },

    #[error("unsupported representation for this operation: {0}")]
    UnsupportedRep(String),

    #[error("optimizer exhausted {0} iterations without convergence or a divergence certificate")]
    MaxIterations(usize),

    #[error("principal minor {index} underflowed ({value:.3e}) for rank-deficient input")]
    SingularMinor { index: usize, value: f64 },

    #[error("rejection sampler acceptance rate fell below {floor:.1e}")]
    Timeout { floor: f64 },

    #[error("rejection envelope violated: weight {weight:.6e} exceeds bound {bound:.6e}")]
    EnvelopeOverflow { weight: f64, bound: f64 },

    #[error("region has no observed mass at m = {m}; empirical rate is only a lower bound")]
    DegenerateRegion { m: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
