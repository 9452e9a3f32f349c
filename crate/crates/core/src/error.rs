//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {what}: {why}")]
    InvalidInput { what: &'static str, why: String },

    #[error("basis too large: {dim} states exceeds the configured maximum {max}")]
    BasisTooLarge { dim: usize, max: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("basis has no environment label")]
    MissingEnvironment,

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("trace must be 1 (got {trace:.12})")]
    InvalidTrace { trace: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("eigendecomposition did not converge")]
    EigenFailed,

    #[error("integration diverged at t = {time}: non-finite matrix entries")]
    IntegrationDiverged { time: f64 },

    #[error("singular parameters: {0}")]
    SingularParameters(String),

    #[error("no steady state: {0}")]
    NoSteadyState(String),

    #[error("no dispersive phase: detuning is zero but a nonzero target phase was requested")]
    NoDispersivePhase,

    #[error("unphysical susceptibility magnitude: Re chi = {re_chi} <= -1 at nu_a = {nu}")]
    UnphysicalSusceptibility { re_chi: f64, nu: f64 },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::InvalidInput {
            what,
            why: why.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
