use thiserror::Error;

/// Errors produced by the simulation, analysis and orchestration layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("hypergeometric series has a pole: {0} is a non-positive integer")]
    HypergeometricPole(String),

    #[error("hypergeometric series did not converge within {0} terms")]
    HypergeometricNonConvergence(usize),

    #[error("integration failed at t = {t}: step size {h:e} underflowed")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("integration failed at t = {t}: exceeded {max_steps} steps")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("integration failed at t = {t}: non-finite state")]
    NonFiniteState { t: f64 },

    #[error("linear system is singular at pivot {0}")]
    Singular(usize),

    #[error("steady state is not unique: smallest singular value estimate {margin:e} (relative)")]
    DegenerateSteadyState { margin: f64 },

    #[error("steady-state residual {residual:e} exceeds bound {bound:e}")]
    SteadyStateResidual { residual: f64, bound: f64 },

    #[error("eigensolver did not converge")]
    EigensolverFailure,

    #[error("spectrum has {0} eigenvalues inside the null tolerance (expected exactly one)")]
    NullSpaceCount(usize),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("non-adiabatic window exceeds the scanned range on the {0} side")]
    WindowOutOfRange(&'static str),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
