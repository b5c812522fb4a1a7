//! The Bessel heat kernel `P_t(x, y)` of `e^{-tB}` on `L²(x^α dx)` and its action on grid
//! functions.

mod apply;
mod bessel;
mod bounds;

pub use apply::{heat_apply, HeatMatrix};
pub use bessel::{bessel_i_scaled, ScaledBessel};
pub use bounds::{count_violations, gaussian_bound_constants, GaussianBoundReport, SampleSpec, Witness};

use crate::error::{check_positive, Error, Result};
use crate::measure::WeightedMeasure;
use crate::quad;

/// Half-width of the band, in units of `√t`, outside which the kernel is treated as 0.
/// The Gaussian factor there is below `e^{-42}`.
pub const BAND: f64 = 13.0;

/// The kernel at a fixed time.
///
/// `P_t(x,y) = (2t)^{-1} e^{-(x²+y²)/4t} I_ν(xy/2t) (xy)^{-ν}` with `ν = (α-1)/2`, evaluated as
/// `(2t)^{-1} (4t)^{-ν} e^{-(x-y)²/4t} · e^{-z} I_ν(z) (z/2)^{-ν}` at `z = xy/2t`.
#[derive(Debug, Clone)]
pub struct KernelEval {
    alpha: f64,
    t: f64,
    ln_prefactor: f64,
    bessel: ScaledBessel,
}

impl KernelEval {
    pub fn new(m: &WeightedMeasure, t: f64) -> Result<Self> {
        check_positive("t", t)?;
        let nu = 0.5 * (m.alpha() - 1.0);
        Ok(Self {
            alpha: m.alpha(),
            t,
            ln_prefactor: -(2.0 * t).ln() - nu * (4.0 * t).ln(),
            bessel: ScaledBessel::new(nu)?,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Order of the Bessel function in the kernel.
    pub fn order(&self) -> f64 {
        self.bessel.order()
    }

    /// `P_t(x, y)` for `x, y >= 0`.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let d = x - y;
        let z = x * y / (2.0 * self.t);
        (self.ln_prefactor - d * d / (4.0 * self.t)).exp() * self.bessel.reduced(z)
    }

    /// `ln P_t(x, y)`, finite even where `P_t` underflows.
    pub fn ln_value(&self, x: f64, y: f64) -> f64 {
        let d = x - y;
        let z = x * y / (2.0 * self.t);
        self.ln_prefactor - d * d / (4.0 * self.t) + self.bessel.ln_reduced(z)
    }

    /// `lim P_t(x, y)` as `x, y → 0`.
    pub fn origin_value(&self) -> f64 {
        self.value(0.0, 0.0)
    }

    /// Radius beyond which `P_t(·, y)` is negligible.
    pub fn band(&self) -> f64 {
        BAND * self.t.sqrt()
    }

    /// `|∫ P_t(·, y) dμ - 1|` by adaptive quadrature.
    pub fn mass_residual(&self, y: f64, tol: f64) -> Result<MassReport> {
        check_positive("tolerance", tol)?;
        let s = self.t.sqrt();
        let radius = 14.0 * s;
        let (lo, hi) = ((y - radius).max(0.0), y + radius);
        let mut mass = 0.0;
        let mut error = 0.0;
        let mut start = lo;
        if lo == 0.0 {
            let (v, h, e) = self.origin_panel(y, s.min(hi), tol * 0.1)?;
            mass += v;
            error += e;
            start = h;
        }
        let mut breaks = vec![start];
        let pieces = ((hi - start) / s).ceil().max(1.0) as usize;
        breaks.extend((1..pieces).map(|k| start + (hi - start) * k as f64 / pieces as f64));
        breaks.push(hi);
        if y > start && y < hi {
            breaks.push(y);
            breaks.sort_by(f64::total_cmp);
        }
        let est = quad::adaptive(|x| self.value(x, y) * x.powf(self.alpha), &breaks, tol, 20_000)?;
        mass += est.value;
        error += est.error;
        Ok(MassReport {
            residual: (mass - 1.0).abs(),
            mass,
            error_estimate: error,
            truncation_radius: radius,
        })
    }

    /// Gauss–Jacobi panel `[0, h]`, halving `h` until the 20- and 40-point rules agree.
    /// Returns the integral over `[0, h]`, the final `h` and the disagreement.
    fn origin_panel(&self, y: f64, h0: f64, tol: f64) -> Result<(f64, f64, f64)> {
        let coarse = quad::jacobi_origin(self.alpha, 20);
        let fine = quad::jacobi_origin(self.alpha, 40);
        let mut h = h0;
        for _ in 0..40 {
            let a = quad::gauss_origin(&coarse, self.alpha, h, |x| self.value(x, y));
            let b = quad::gauss_origin(&fine, self.alpha, h, |x| self.value(x, y));
            if (a - b).abs() <= tol {
                return Ok((b, h, (a - b).abs()));
            }
            h *= 0.5;
        }
        Err(Error::NonConvergence {
            tolerance: tol,
            estimate: f64::NAN,
            budget: 40,
        })
    }
}

/// Outcome of a normalisation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassReport {
    pub residual: f64,
    pub mass: f64,
    pub error_estimate: f64,
    pub truncation_radius: f64,
}

/// `P_t(x, y)`.
pub fn heat_kernel(k: &KernelEval, x: f64, y: f64) -> f64 {
    k.value(x, y)
}

/// `|∫ P_t(·, y) dμ - 1|`.
pub fn heat_kernel_mass_residual(k: &KernelEval, y: f64, tol: f64) -> Result<MassReport> {
    k.mass_residual(y, tol)
}
