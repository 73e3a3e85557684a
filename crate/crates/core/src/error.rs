use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("truncated tail mass {lost:.3e} exceeds tolerance {tolerance:.3e}")]
    TailMass { lost: f64, tolerance: f64 },

    #[error("infeasible budget: Γ = {gamma} does not exceed the essential infimum {infimum} of the cost")]
    Infeasible { gamma: f64, infimum: f64 },

    #[error("dual bracket not found for λ1 within [-{limit}, 0]")]
    Bracket { limit: f64 },

    #[error("dual residual too large: |∫f − 1| = {norm:.3e}, |E[r] − Γ| = {cost:.3e}")]
    Residual { norm: f64, cost: f64 },

    #[error("enumeration budget exceeded: {needed} > {budget}")]
    EnumerationBudget { needed: f64, budget: f64 },

    #[error("typical set is empty for n = {n}, ε = {eps}")]
    EmptyTypicalSet { n: usize, eps: f64 },

    #[error("rejection acceptance {acceptance:.3e} is below the floor {floor:.1e}")]
    Starvation { acceptance: f64, floor: f64 },

    #[error("sampling gave up after {attempts} attempts")]
    Sampling { attempts: u64 },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("operation needs enumerate mode: {0}")]
    Mode(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("AR recursion became unstable at step {step} (|x| = {value:.3e})")]
    Instability { step: usize, value: f64 },

    #[error("target rate {target} not reached; best achieved {achieved}")]
    TargetUnreachable { target: f64, achieved: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validation<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()))
}
