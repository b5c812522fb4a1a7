use super::KernelEval;
use crate::error::{check_positive, Result};
use crate::measure::{ball, WeightedMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Candidate rates for the lower bound `e^{-|x-y|²/(c₁ t)}`; the kernel decays like `c = 4`.
pub const LOWER_RATES: [f64; 5] = [1.0, 2.0, 3.0, 3.5, 3.9];
/// Candidate rates for the upper bounds.
pub const UPPER_RATES: [f64; 5] = [4.1, 4.5, 5.0, 6.0, 8.0];

/// Log-uniform sampling ranges for `(x, y, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSpec {
    pub samples: usize,
    pub x_range: (f64, f64),
    pub t_range: (f64, f64),
    pub seed: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            samples: 10_000,
            x_range: (1e-2, 1e2),
            t_range: (1e-2, 1e2),
            seed: 1,
        }
    }
}

/// A sample point together with the log-ratio that decided a constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub ln_ratio: f64,
}

/// Fitted constants for
/// `C⁻¹ μ(B(x,√t))⁻¹ e^{-|x-y|²/(c₁t)} ≤ P_t(x,y) ≤ C μ(B(x,√t))⁻¹ e^{-|x-y|²/(c₂t)}`
/// and `|∂_x P_t(x,y)| ≤ C_d t^{-1/2} μ(B(x,√t))⁻¹ e^{-|x-y|²/(c_d t)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianBoundReport {
    pub spec: SampleSpec,
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub c_lower: f64,
    pub c_upper: f64,
    pub c_derivative: f64,
    pub derivative_rate: f64,
    pub lower_witness: Witness,
    pub upper_witness: Witness,
    pub derivative_witness: Witness,
    /// Sample points where the fitted sandwich or derivative bound fails. Empty unless a
    /// constant came out infinite.
    pub violations: Vec<Witness>,
}

impl GaussianBoundReport {
    pub fn holds(&self) -> bool {
        self.c.is_finite() && self.c_derivative.is_finite() && self.violations.is_empty()
    }
}

struct Sample {
    x: f64,
    y: f64,
    t: f64,
    /// `ln(P_t(x,y) μ(B(x,√t)))`.
    ln_pm: f64,
    /// `ln(|∂_x P_t(x,y)| √t μ(B(x,√t)))`.
    ln_dpm: f64,
    /// `|x - y|²/t`.
    d2: f64,
}

fn log_uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// Largest `ln` ratio over the samples for a rate; returns the maximiser.
fn fit<F: Fn(&Sample) -> f64>(samples: &[Sample], f: F) -> (f64, usize) {
    samples
        .iter()
        .enumerate()
        .map(|(i, s)| (f(s), i))
        .fold((f64::NEG_INFINITY, 0), |acc, p| if p.0 > acc.0 { p } else { acc })
}

/// Fit the constants of the two-sided Gaussian estimate and the derivative bound on
/// random samples.
///
/// Rates are chosen from [`LOWER_RATES`] and [`UPPER_RATES`] to minimise the constant.
/// All comparisons are made in log space, so deep Gaussian tails are covered.
pub fn gaussian_bound_constants(m: &WeightedMeasure, spec: SampleSpec) -> Result<GaussianBoundReport> {
    check_positive("x_range", spec.x_range.0)?;
    check_positive("t_range", spec.t_range.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut samples = Vec::with_capacity(spec.samples);
    for _ in 0..spec.samples {
        let x = log_uniform(&mut rng, spec.x_range);
        let y = log_uniform(&mut rng, spec.x_range);
        let t = log_uniform(&mut rng, spec.t_range);
        let k = KernelEval::new(m, t)?;
        let ln_mu = m.mu(&ball(x, t.sqrt()).support).ln();
        let ln_p = k.ln_value(x, y);
        let h = 1e-5 * t.sqrt().min(x);
        let dln = (k.ln_value(x + h, y) - k.ln_value(x - h, y)) / (2.0 * h);
        samples.push(Sample {
            x,
            y,
            t,
            ln_pm: ln_p + ln_mu,
            ln_dpm: ln_p + dln.abs().ln() + 0.5 * t.ln() + ln_mu,
            d2: (x - y).powi(2) / t,
        });
    }

    let witness = |i: usize, ln_ratio: f64| Witness {
        x: samples[i].x,
        y: samples[i].y,
        t: samples[i].t,
        ln_ratio,
    };
    let best = |rates: &[f64], g: &dyn Fn(&Sample, f64) -> f64| {
        rates
            .iter()
            .map(|&c| (c, fit(&samples, |s| g(s, c))))
            .fold((f64::NAN, (f64::INFINITY, 0)), |acc, p| if p.1 .0 < acc.1 .0 { p } else { acc })
    };
    let (c1, (ln_lo, i_lo)) = best(&LOWER_RATES, &|s, c| -s.ln_pm - s.d2 / c);
    let (c2, (ln_up, i_up)) = best(&UPPER_RATES, &|s, c| s.ln_pm + s.d2 / c);
    let (cd, (ln_d, i_d)) = best(&UPPER_RATES, &|s, c| s.ln_dpm + s.d2 / c);

    let c = ln_lo.max(ln_up).exp().max(1.0);
    let c_derivative = ln_d.exp();
    let mut violations = Vec::new();
    let slack = 1e-12;
    for (i, s) in samples.iter().enumerate() {
        let lower = -c.ln() - s.d2 / c1;
        let upper = c.ln() - s.d2 / c2;
        let deriv = c_derivative.ln() - s.d2 / cd;
        if s.ln_pm < lower - slack || s.ln_pm > upper + slack || s.ln_dpm > deriv + slack {
            violations.push(witness(i, s.ln_pm));
        }
    }
    Ok(GaussianBoundReport {
        spec,
        c,
        c1,
        c2,
        c_lower: ln_lo.exp(),
        c_upper: ln_up.exp(),
        c_derivative,
        derivative_rate: cd,
        lower_witness: witness(i_lo, ln_lo),
        upper_witness: witness(i_up, ln_up),
        derivative_witness: witness(i_d, ln_d),
        violations,
    })
}

/// Count points of a fresh sample where a report's sandwich fails.
pub fn count_violations(m: &WeightedMeasure, report: &GaussianBoundReport, spec: SampleSpec) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut failures = 0;
    for _ in 0..spec.samples {
        let x = log_uniform(&mut rng, spec.x_range);
        let y = log_uniform(&mut rng, spec.x_range);
        let t = log_uniform(&mut rng, spec.t_range);
        let k = KernelEval::new(m, t)?;
        let ln_pm = k.ln_value(x, y) + m.mu(&ball(x, t.sqrt()).support).ln();
        let d2 = (x - y).powi(2) / t;
        if ln_pm < -report.c.ln() - d2 / report.c1 || ln_pm > report.c.ln() - d2 / report.c2 {
            failures += 1;
        }
    }
    Ok(failures)
}
