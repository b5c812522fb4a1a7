use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("power potential x^-{gamma} is not locally integrable against x^{alpha} dx (need gamma < 1 + alpha)")]
    NonLocallyIntegrable { gamma: f64, alpha: f64 },

    #[error("stopping functional stays <= 1 up to scale 2^{max_scale}; the potential is degenerate")]
    DegeneratePotential { max_scale: i32 },

    #[error("stopping functional stays > 1 down to scale 2^{min_scale} near x = {x}")]
    Unresolved { min_scale: i32, x: f64 },

    #[error("no balanced interval between 2I and 2I^d: F(2I^d) = {f_parent} <= 1")]
    BalanceUnreachable { f_parent: f64 },

    #[error("support [{lo}, {hi}] is not contained in I** = [{host_lo}, {host_hi}]")]
    SupportViolation {
        lo: f64,
        hi: f64,
        host_lo: f64,
        host_hi: f64,
    },

    #[error("cutoff violates its envelope at x = {x}: {reason}")]
    CutoffViolation { x: f64, reason: &'static str },

    #[error("grid functions live on different grids")]
    MixedGrids,

    #[error("quadrature did not reach tolerance {tolerance:e} (estimate {estimate:e}) within {budget} panels")]
    NonConvergence {
        tolerance: f64,
        estimate: f64,
        budget: usize,
    },

    #[error("potential accumulated along a path overflowed at t = {t}")]
    PathOverflow { t: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and positive",
        })
    }
}
