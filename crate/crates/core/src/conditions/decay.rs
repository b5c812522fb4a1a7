use crate::error::{check_positive, Error, Result};
use crate::grid::{Grid, GridFunction, GridSpec};
use crate::kernel::{heat_apply, KernelEval};
use crate::measure::{enlarge, Interval, Potential, WeightedMeasure};
use crate::quad;
use crate::section::ProperSection;
use crate::semigroup::Propagator;
use serde::Serialize;

/// Least-squares line through `(x, y)`: `(slope, intercept)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// A fitted decay exponent with the data it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFitReport {
    pub interval: Interval,
    /// Node the kernel column or the supremum is attached to.
    pub point: f64,
    /// `(n, M(n))` for (D), `(t/|I|², G(t))` for (K).
    pub data: Vec<(f64, f64)>,
    /// Slope of `log₂ M` against `n` for (D), of `log G` against `log(t/|I|²)` for (K).
    pub exponent: f64,
    /// Smallest constant making the fitted power law an upper bound on every point.
    pub constant: f64,
    /// The rate the exponent is compared with.
    pub target: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// For (D): `ε` in `M(k) ≤ C k^{-1-ε}`, from a log-log fit.
    pub epsilon: Option<f64>,
}

/// Grid and stepping for the decay checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayOptions {
    pub cells: usize,
    pub ratio: f64,
    /// `x_max = sup I + reach √t_max`.
    pub reach: f64,
    /// Strang steps per doubling of `t`.
    pub steps_per_octave: usize,
    /// Sampled `t = 2^{-k} |I|²`, `k = 0..k_points`, for (K).
    pub k_points: usize,
    /// Sample points `x` per unit of `I***` for the supremum in (K).
    pub x_samples: usize,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self {
            cells: 600,
            ratio: 1.04,
            reach: 10.0,
            steps_per_octave: 8,
            k_points: 8,
            x_samples: 17,
        }
    }
}

/// Evenly spaced members of a section, first and last included.
pub fn sample_intervals(section: &ProperSection, count: usize) -> Vec<Interval> {
    let n = section.len();
    if n == 0 || count == 0 {
        return Vec::new();
    }
    let count = count.min(n);
    let mut idx: Vec<usize> = (0..count)
        .map(|k| if count == 1 { 0 } else { k * (n - 1) / (count - 1) })
        .collect();
    idx.dedup();
    idx.into_iter().map(|i| section.intervals[i].interval()).collect()
}

fn last_half(n: usize) -> std::ops::Range<usize> {
    n / 2..n
}

/// Condition (D) at the node nearest `y`: `M(n) = ∫ K_{2^n|I|²}(x, y) dμ(x)` for
/// `n = 0..=n_max`, with the slope of `log₂ M` fitted over the last half of the range.
/// Passes if the slope is at most `-(1-α)/2 + 0.1`.
pub fn check_condition_d(
    m: &WeightedMeasure,
    v: &Potential,
    interval: &Interval,
    y: f64,
    n_max: usize,
    opts: &DecayOptions,
) -> Result<DecayFitReport> {
    if n_max < 2 {
        return Err(Error::InvalidParameter {
            name: "n_max",
            value: n_max as f64,
            reason: "need at least three points",
        });
    }
    let scale = interval.len() * interval.len();
    let times: Vec<f64> = (0..=n_max).map(|n| scale * 2f64.powi(n as i32)).collect();
    let t_max = times[n_max];
    let mut breaks = v.breakpoints();
    breaks.extend([interval.lo(), interval.hi()]);
    breaks.retain(|&b| b > 0.0);
    let spec = GridSpec::new(opts.cells, interval.hi().max(y) + opts.reach * t_max.sqrt(), opts.ratio)?;
    let grid = Grid::build(m, spec, &breaks)?;
    let j = grid.nearest_node(y);
    let delta = GridFunction::delta(grid.clone(), j);
    let mut masses = vec![0.0; times.len()];
    match v.as_constant() {
        Some(c) => {
            for (k, &t) in times.iter().enumerate() {
                masses[k] = (-c * t).exp() * heat_apply(t, &delta)?.integral();
            }
        }
        None => {
            let prop = Propagator::new(grid.clone(), v)?;
            let mut values = delta.values().to_vec();
            let mut now = 0.0;
            for (k, &t) in times.iter().enumerate() {
                let n = opts.steps_per_octave.max(1);
                prop.advance(&mut values, (t - now) / n as f64, n, true)?;
                now = t;
                masses[k] = values.iter().zip(grid.weights()).map(|(v, w)| v * w).sum();
            }
        }
    }
    let data: Vec<(f64, f64)> = masses.iter().enumerate().map(|(n, &mass)| (n as f64, mass)).collect();
    let fit = last_half(data.len());
    let (xs, ys): (Vec<f64>, Vec<f64>) = data[fit.clone()].iter().map(|&(n, mass)| (n, mass.max(f64::MIN_POSITIVE).log2())).unzip();
    let (slope, _) = fit_line(&xs, &ys);
    let constant = data
        .iter()
        .map(|&(n, mass)| mass * 2f64.powf(-slope * n))
        .fold(0.0, f64::max);
    let tail: Vec<(f64, f64)> = data[fit.start.max(1)..]
        .iter()
        .map(|&(n, mass)| (n.ln(), mass.max(f64::MIN_POSITIVE).ln()))
        .collect();
    let epsilon = (tail.len() >= 2).then(|| {
        let (lx, ly): (Vec<f64>, Vec<f64>) = tail.into_iter().unzip();
        -fit_line(&lx, &ly).0 - 1.0
    });
    let target = -(1.0 - m.alpha()) / 2.0;
    let tolerance = 0.1;
    Ok(DecayFitReport {
        interval: *interval,
        point: grid.nodes()[j],
        data,
        exponent: slope,
        constant,
        target,
        tolerance,
        passed: slope <= target + tolerance,
        epsilon,
    })
}

/// `∫_{I***} P_s(x, y) V(y) dμ(y)`.
fn local_interaction(k: &KernelEval, v: &Potential, x: f64, support: &Interval) -> f64 {
    let alpha = k.alpha();
    let s = k.t().sqrt();
    let lo = support.lo().max(x - k.band());
    let hi = support.hi().min(x + k.band());
    if hi <= lo {
        return 0.0;
    }
    let f = |y: f64| k.value(x, y);
    let scale = 0.5 * s;
    let mut total = 0.0;
    for piece in v.pieces() {
        let (a, b) = (lo.max(piece.interval.lo()), hi.min(piece.interval.hi()));
        if b > a && piece.value != 0.0 {
            total += piece.value * integrate_split(&f, a, b, x, alpha, scale);
        }
    }
    if let Some(t) = v.power_tail() {
        if t.coeff != 0.0 {
            total += t.coeff * integrate_split(&f, lo, hi, x, alpha - t.gamma, scale);
        }
    }
    total
}

/// `∫_a^b f(y) y^p dy`, split at the kernel peak `x`.
fn integrate_split(f: &dyn Fn(f64) -> f64, a: f64, b: f64, x: f64, p: f64, scale: f64) -> f64 {
    if a < x && x < b {
        quad::power_weighted(f, a, x, p, scale, 8) + quad::power_weighted(f, x, b, p, scale, 8)
    } else {
        quad::power_weighted(f, a, b, p, scale, 8)
    }
}

/// `G(t) = sup_x ∫_0^{2t} ∫_{I***} P_s(x, y) V(y) dμ(y) ds` over sampled `x`.
///
/// The time integral is taken in `u = √s`, where the integrand is smooth.
fn interaction(m: &WeightedMeasure, v: &Potential, support: &Interval, t: f64, xs: &[f64]) -> Result<(f64, f64)> {
    let u_max = (2.0 * t).sqrt();
    let rule = quad::legendre(8);
    let panels = 4;
    let mut nodes = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let (a, b) = (u_max * p as f64 / panels as f64, u_max * (p + 1) as f64 / panels as f64);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        for &(z, w) in rule.iter() {
            let u = c + h * z;
            nodes.push((u, 2.0 * u * w * h));
        }
    }
    let kernels: Vec<(KernelEval, f64)> = nodes
        .iter()
        .map(|&(u, w)| KernelEval::new(m, u * u).map(|k| (k, w)))
        .collect::<Result<_>>()?;
    let mut best = (0.0, xs[0]);
    for &x in xs {
        let g: f64 = kernels.iter().map(|(k, w)| w * local_interaction(k, v, x, support)).sum();
        if g > best.0 {
            best = (g, x);
        }
    }
    Ok(best)
}

/// Condition (K) on `I`: `G(t)` at `t = 2^{-k}|I|²`, `k = 0..k_points`, with the exponent
/// `δ` of `G ≈ C (t/|I|²)^δ` fitted over the smaller half of the times. Passes if
/// `δ ≥ (1-α)/2 - 0.1` when `ρ(0, I) ≤ 2|I|`, and `δ ≥ 1/2 - 0.1` otherwise.
pub fn check_condition_k(
    m: &WeightedMeasure,
    v: &Potential,
    interval: &Interval,
    beta: f64,
    opts: &DecayOptions,
) -> Result<DecayFitReport> {
    check_positive("beta", beta - 1.0)?;
    let support = enlarge(interval, beta * beta * beta).support;
    let count = (opts.x_samples.max(2) as f64 * support.len() / interval.len()).ceil() as usize;
    let xs: Vec<f64> = (0..=count)
        .map(|i| support.lo() + support.len() * i as f64 / count as f64)
        .map(|x| x.max(1e-3 * interval.len()))
        .collect();
    let scale = interval.len() * interval.len();
    let mut data = Vec::with_capacity(opts.k_points + 1);
    let mut point = xs[0];
    for k in (0..=opts.k_points).rev() {
        let r = 2f64.powi(-(k as i32));
        let (g, x) = interaction(m, v, &support, r * scale, &xs)?;
        data.push((r, g));
        if k == 0 {
            point = x;
        }
    }
    let target = if interval.lo() <= 2.0 * interval.len() {
        (1.0 - m.alpha()) / 2.0
    } else {
        0.5
    };
    let tolerance = 0.1;
    if data.iter().all(|&(_, g)| g == 0.0) {
        return Ok(DecayFitReport {
            interval: *interval,
            point,
            data,
            exponent: f64::INFINITY,
            constant: 0.0,
            target,
            tolerance,
            passed: true,
            epsilon: None,
        });
    }
    let fit = 0..data.len().div_ceil(2);
    let (lx, ly): (Vec<f64>, Vec<f64>) = data[fit].iter().map(|&(r, g)| (r.ln(), g.max(f64::MIN_POSITIVE).ln())).unzip();
    let (delta, _) = fit_line(&lx, &ly);
    let constant = data.iter().map(|&(r, g)| g / r.powf(delta)).fold(0.0, f64::max);
    Ok(DecayFitReport {
        interval: *interval,
        point,
        data,
        exponent: delta,
        constant,
        target,
        tolerance,
        passed: delta >= target - tolerance,
        epsilon: None,
    })
}
