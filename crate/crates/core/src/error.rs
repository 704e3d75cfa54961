use thiserror::Error;

/// Errors raised by the analysis, simulation and optimization routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "radius bisection did not converge after {iterations} iterations \
         (bracket [{lo}, {hi}] m, residual {residual:e} s)"
    )]
    Bisection {
        lo: f64,
        hi: f64,
        residual: f64,
        iterations: usize,
    },

    #[error(
        "quadrature did not reach tolerance after {subdivisions} subdivisions \
         (worst interval [{a}, {b}], error estimate {error:e})"
    )]
    Quadrature {
        a: f64,
        b: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("fallback point (h = {altitude} m, P_d = {power} W) is infeasible for budgets battery = {battery} J, fuel = {fuel} J")]
    InfeasibleFallback {
        altitude: f64,
        power: f64,
        battery: f64,
        fuel: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure(cond: bool, name: &'static str, reason: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(invalid(name, reason))
    }
}
