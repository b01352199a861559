use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolwaveError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Discriminant (c-1)^2 + 2g is not positive: no saddle/center pair.
    #[error("degenerate system: discriminant {delta} <= 0 (c = {c}, g = {g})")]
    DegenerateSystem { c: f64, g: f64, delta: f64 },

    #[error("phi = {phi} is not an equilibrium (residual {residual:e})")]
    NotAnEquilibrium { phi: f64, residual: f64 },

    #[error("quadrature did not converge: estimated error {error:e} > tolerance {tolerance:e}")]
    QuadratureFailure { error: f64, tolerance: f64 },

    #[error("no admissible zero of the reduced Melnikov function for g = {g}")]
    NoRoot { g: f64 },

    #[error("bracket [{lo}, {hi}] does not enclose a sign change")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("zero at c = {c} is not simple (dM*/dc = {derivative:e})")]
    NotSimpleZero { c: f64, derivative: f64 },

    #[error("step size underflow at xi = {xi} (h = {h:e})")]
    StepUnderflow { xi: f64, h: f64 },

    #[error("maximum number of steps ({0}) exceeded")]
    MaxStepsExceeded(usize),

    #[error("non-finite state encountered at xi = {xi}")]
    NonFiniteState { xi: f64 },
}

pub type Result<T> = std::result::Result<T, SolwaveError>;
