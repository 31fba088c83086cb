use thiserror::Error;

/// Everything that can go wrong while computing survival probabilities,
/// purities, or the Laplace data of a spectral kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quadrature did not converge after {evaluations} evaluations (error estimate {error_estimate:e})")]
    NonConvergence {
        evaluations: usize,
        error_estimate: f64,
    },

    #[error("integrand is not finite at x = {at}")]
    NonFinite { at: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid spectral kernel: {0}")]
    InvalidKernel(String),

    #[error("maximum of |lambda| sits on the bracket edge at E = {at}; the Laplace method does not apply")]
    BoundaryMaximum { at: f64 },

    #[error("maximum of |lambda| near E = {at} is flat or not unique")]
    DegenerateMaximum { at: f64 },

    #[error("Laplace data is not valid (zero or negative curvature at the peak)")]
    InvalidLaplace,

    #[error("survival probability {probability:e} is too small to normalize the state")]
    DegenerateProbability { probability: f64 },

    #[error("invalid particle state: {0}")]
    InvalidState(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("sin(omega_tau/2) vanishes at omega_tau = {omega_tau}; the cavity decouples and nothing is filtered")]
    StroboscopicDecoupling { omega_tau: f64 },

    #[error("operation requires a {expected} cavity state")]
    WrongCavity { expected: &'static str },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
