//! The weighted measure `dμ = x^α dx` on `(0, ∞)` and closed-form arithmetic on intervals.

mod potential;

pub use potential::{Piece, Potential, PowerTail};

use crate::error::{check_positive, Error, Result};
use serde::{Deserialize, Serialize};

/// `b^p - a^p` for `0 <= a <= b`, `p > 0`, without cancellation when `a ≈ b`.
pub(crate) fn pow_diff(a: f64, b: f64, p: f64) -> f64 {
    if a <= 0.0 {
        b.powf(p)
    } else if b <= a {
        0.0
    } else if 2.0 * a < b {
        b.powf(p) - a.powf(p)
    } else {
        a.powf(p) * (p * ((b - a) / a).ln_1p()).exp_m1()
    }
}

/// A bounded interval `[a, b]` with `0 <= a < b < ∞`.
///
/// Endpoints are closed or open as the context requires; every quantity computed here
/// is insensitive to the difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a < 0.0 {
            return Err(Error::InvalidParameter {
                name: "interval",
                value: a,
                reason: "endpoints must be finite with a >= 0",
            });
        }
        if b <= a {
            return Err(Error::InvalidParameter {
                name: "interval",
                value: b,
                reason: "right endpoint must exceed the left endpoint",
            });
        }
        Ok(Self { a, b })
    }

    /// Panicking constructor for endpoints known to be valid.
    pub fn of(a: f64, b: f64) -> Self {
        Self::new(a, b).expect("valid interval")
    }

    pub fn lo(&self) -> f64 {
        self.a
    }

    pub fn hi(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn touches_origin(&self) -> bool {
        self.a == 0.0
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }

    /// `self ⊆ other`, with a relative slack for rounding in enlargements.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        let eps = 1e-12 * other.b.max(1.0);
        self.a >= other.a - eps && self.b <= other.b + eps
    }

    /// Intersection with positive length, if any.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let a = self.a.max(other.a);
        let b = self.b.min(other.b);
        (b > a).then_some(Interval { a, b })
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            a: self.a.min(other.a),
            b: self.b.max(other.b),
        }
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

/// How `|cI|` is measured when `cI` is cut off at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LengthConvention {
    /// The ball diameter `2cr`, even when part of the ball lies below 0.
    Nominal,
    /// The length of `cI ∩ X`.
    #[default]
    Truncated,
}

/// `B(center, radius) ∩ X` together with the untruncated radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub support: Interval,
    pub radius: f64,
}

impl Ball {
    pub fn len(&self, convention: LengthConvention) -> f64 {
        match convention {
            LengthConvention::Nominal => 2.0 * self.radius,
            LengthConvention::Truncated => self.support.len(),
        }
    }
}

/// `B(x, r) ∩ X`.
pub fn ball(x: f64, r: f64) -> Ball {
    debug_assert!(x >= 0.0 && r > 0.0);
    Ball {
        support: Interval {
            a: (x - r).max(0.0),
            b: x + r,
        },
        radius: r,
    }
}

/// `cI = B(c_I, c|I|/2) ∩ X`.
///
/// A left interval `(0, 2A]` is the ball `B(A, A)`, which is what the centred formula
/// already produces.
pub fn enlarge(interval: &Interval, c: f64) -> Ball {
    debug_assert!(c >= 1.0);
    ball(interval.center(), 0.5 * c * interval.len())
}

/// `|I|²/μ(I)` and the comparable quantity `b^{1-α} - a^{1-α}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport {
    pub ratio: f64,
    pub comparand: f64,
}

/// The measure `x^α dx` on `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedMeasure {
    alpha: f64,
}

impl WeightedMeasure {
    pub fn new(alpha: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `μ((a, b)) = (b^{1+α} - a^{1+α})/(1+α)`; zero when `a >= b`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        let p = 1.0 + self.alpha;
        pow_diff(a, b, p) / p
    }

    pub fn mu(&self, interval: &Interval) -> f64 {
        self.mass(interval.a, interval.b)
    }

    /// Mean of `x` under `μ` restricted to the interval.
    pub fn centroid(&self, interval: &Interval) -> f64 {
        let a = self.alpha;
        let num = pow_diff(interval.a, interval.b, 2.0 + a) / (2.0 + a);
        (num / self.mu(interval)).clamp(interval.a, interval.b)
    }

    pub fn ratio_sq_over_mu(&self, interval: &Interval) -> RatioReport {
        let one_minus = 1.0 - self.alpha;
        let comparand = if one_minus > 0.0 {
            pow_diff(interval.a, interval.b, one_minus)
        } else {
            interval.b.powf(one_minus) - interval.a.powf(one_minus)
        };
        RatioReport {
            ratio: interval.len().powi(2) / self.mu(interval),
            comparand,
        }
    }

    /// `Γ(x, y) = (y - x)²/(y^{α+1} - x^{α+1})`.
    pub fn gamma(&self, x: f64, y: f64) -> f64 {
        (y - x).powi(2) / pow_diff(x, y, 1.0 + self.alpha)
    }

    /// `μ(B(x, 2r))/μ(B(x, r))`.
    pub fn doubling_ratio(&self, x: f64, r: f64) -> f64 {
        self.mu(&ball(x, 2.0 * r).support) / self.mu(&ball(x, r).support)
    }

    /// `∫_I V dμ` in closed form.
    pub fn potential_integral(&self, v: &Potential, interval: &Interval) -> f64 {
        v.moment(interval.a, interval.b, self.alpha)
    }
}
