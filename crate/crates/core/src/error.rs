use crate::quadrature::QuadratureError;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Quadrature(#[from] QuadratureError),

    #[error("Matsubara sum at T = {temperature_k:e} K needs {needed} terms, limit is {limit}")]
    MatsubaraLimit {
        temperature_k: f64,
        needed: u64,
        limit: u64,
    },

    #[error("cancellation failure at T = {temperature_k:e} K: |ΔF| = {delta_f:e} J/m² does not exceed its error {error:e} J/m²")]
    Cancellation {
        temperature_k: f64,
        delta_f: f64,
        error: f64,
    },

    #[error("insufficient temperature grid: {0}")]
    InsufficientGrid(String),

    #[error("entropy at T = {temperature_k:e} K is step-dominated (Richardson discrepancy {discrepancy:e} vs |S| = {entropy:e})")]
    UnconvergedEntropy {
        temperature_k: f64,
        entropy: f64,
        discrepancy: f64,
    },

    #[error("T = {temperature_k:e} K lies outside the asymptotic regime (upper bound {limit_k:e} K)")]
    RegimeViolation { temperature_k: f64, limit_k: f64 },

    #[error("ΔF/T² is not linear in √T: rms residual {rms:e} exceeds {limit:e}")]
    PoorLinearity { rms: f64, limit: f64 },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
