//! Exponentially scaled modified Bessel functions of the first kind.

use crate::error::{Error, Result};
use statrs::function::gamma::gamma;

const ASYMPTOTIC_TERMS: usize = 60;
const MAX_ORDER: f64 = 25.0;

/// `e^{-z} I_ν(z)` for a fixed order, with the coefficients of the large-argument
/// expansion precomputed.
#[derive(Debug, Clone)]
pub struct ScaledBessel {
    order: f64,
    inv_gamma: f64,
    seam: f64,
    coeffs: Vec<f64>,
}

impl ScaledBessel {
    pub fn new(order: f64) -> Result<Self> {
        if !(order > -1.0 && order <= MAX_ORDER) {
            return Err(Error::InvalidParameter {
                name: "order",
                value: order,
                reason: "Bessel order must lie in (-1, 25]",
            });
        }
        let mu = 4.0 * order * order;
        let mut coeffs = Vec::with_capacity(ASYMPTOTIC_TERMS);
        let mut a = 1.0;
        coeffs.push(a);
        for k in 1..ASYMPTOTIC_TERMS {
            let odd = (2 * k - 1) as f64;
            a *= -(mu - odd * odd) / (8.0 * k as f64);
            coeffs.push(a);
        }
        Ok(Self {
            order,
            inv_gamma: 1.0 / gamma(order + 1.0),
            seam: 30.0 + order * order,
            coeffs,
        })
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    /// Argument at which evaluation switches from the series to the expansion.
    pub fn seam(&self) -> f64 {
        self.seam
    }

    /// `e^{-z} I_ν(z) (z/2)^{-ν}`, which is finite and positive on `[0, ∞)` and equals
    /// `1/Γ(ν+1)` at the origin.
    pub fn reduced(&self, z: f64) -> f64 {
        if z < self.seam {
            self.series(z)
        } else {
            self.asymptotic(z) * (0.5 * z).powf(-self.order)
        }
    }

    /// `e^{-z} I_ν(z)`.
    pub fn scaled(&self, z: f64) -> f64 {
        if z == 0.0 {
            return match self.order {
                0.0 => 1.0,
                o if o > 0.0 => 0.0,
                _ => f64::INFINITY,
            };
        }
        if z < self.seam {
            self.series(z) * (0.5 * z).powf(self.order)
        } else {
            self.asymptotic(z)
        }
    }

    /// `ln(e^{-z} I_ν(z) (z/2)^{-ν})`.
    pub fn ln_reduced(&self, z: f64) -> f64 {
        if z < self.seam {
            self.series(z).ln()
        } else {
            self.asymptotic(z).ln() - self.order * (0.5 * z).ln()
        }
    }

    pub(crate) fn series(&self, z: f64) -> f64 {
        let q = 0.25 * z * z;
        let mut term = (-z).exp() * self.inv_gamma;
        let mut sum = term;
        let mut m = 0.0;
        loop {
            m += 1.0;
            term *= q / (m * (m + self.order));
            sum += term;
            if term <= 1e-17 * sum && m > 0.5 * z {
                return sum;
            }
        }
    }

    pub(crate) fn asymptotic(&self, z: f64) -> f64 {
        let inv = 1.0 / z;
        let mut sum = 0.0;
        let mut power = 1.0;
        let mut last = f64::INFINITY;
        for &c in &self.coeffs {
            let term = c * power;
            if term.abs() > last {
                break;
            }
            sum += term;
            last = term.abs();
            if last <= 1e-17 * sum.abs() {
                break;
            }
            power *= inv;
        }
        sum / (2.0 * std::f64::consts::PI * z).sqrt()
    }
}

/// `e^{-z} I_order(z)` for `order > -1` and `z >= 0`.
pub fn bessel_i_scaled(order: f64, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "z",
            value: z,
            reason: "argument must be nonnegative",
        });
    }
    Ok(ScaledBessel::new(order)?.scaled(z))
}
