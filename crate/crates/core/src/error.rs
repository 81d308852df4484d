use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside its physical domain.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The dimensionless rescaling is only defined for unit mass.
    #[error("rescaling requires m = 1, got m = {mass}")]
    ConventionViolation { mass: f64 },

    #[error("gap equation did not converge after {iterations} iterations (last Ω = {omega_big}, residual = {residual:e})")]
    GapNonConvergence {
        iterations: usize,
        omega_big: f64,
        residual: f64,
    },

    #[error("quadrature did not reach tolerance {tolerance:e}: estimate {estimate} with error bound {error_bound:e}")]
    QuadratureNonConvergence {
        estimate: f64,
        error_bound: f64,
        tolerance: f64,
    },

    #[error("oscillator basis reached the cap of {cap} states: partial free energy {partial} (last change {change:e})")]
    BasisCapExceeded { cap: usize, partial: f64, change: f64 },

    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),

    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("output failed: {0}")]
    Output(String),
}

impl Error {
    /// True for errors caused by numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::GapNonConvergence { .. }
                | Error::QuadratureNonConvergence { .. }
                | Error::BasisCapExceeded { .. }
        )
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}
