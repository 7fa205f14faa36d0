use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no pure-imaginary crossing: {0}")]
    NoCrossing(String),

    #[error("neither arccos branch verifies for omega = {omega}: residuals {principal:e} / {mirrored:e}")]
    BranchFailure { omega: f64, principal: f64, mirrored: f64 },

    #[error("degenerate crossing: |h'(z0)| = {h_prime:e} (or root not simple)")]
    DegenerateCrossing { h_prime: f64 },

    #[error("contour passes through a root after {retries} perturbations (min |f| = {min_modulus:e})")]
    ContourOnRoot { retries: usize, min_modulus: f64 },

    #[error("winding number not integral: residual {residual}")]
    NonIntegerWinding { residual: f64 },

    #[error("lost root during continuation at tau = {tau}")]
    LostRoot { tau: f64 },

    #[error("step {step} too large for delay {tau} (must be <= tau/4)")]
    StepTooLarge { step: f64, tau: f64 },

    #[error("solution left the finite range at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("time {t} outside the computed range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("trajectory too short for envelope analysis: {0}")]
    TooShort(String),
}
