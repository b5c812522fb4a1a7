use crate::error::{check_positive, Error, Result};
use crate::measure::{Potential, WeightedMeasure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

/// Paths simulated by one worker; worker `w` draws from stream `w` of the seeded generator.
pub const PATHS_PER_WORKER: usize = 4096;

/// Monte Carlo estimate with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
}

/// `E^{x0}[exp(-∫_0^t V(B_s) ds) f(B_t)]` for the Bessel process generated by
/// `f'' + (α/x) f'`.
///
/// `B_t²` is a squared Bessel process of dimension `δ = α + 1` run at twice the speed, so
/// over a step `Δ` the law of `B²_{s+Δ}/(2Δ)` given `B_s` is noncentral chi-square with
/// `δ` degrees of freedom and noncentrality `B_s²/(2Δ)`. Since `δ > 1` it is sampled
/// exactly as `(Z + √λ)² + χ²_{δ-1}`. The potential is integrated by the trapezoid rule
/// on the step grid.
#[allow(clippy::too_many_arguments)]
pub fn feynman_kac(
    m: &WeightedMeasure,
    v: &Potential,
    t: f64,
    x0: f64,
    f: &(dyn Fn(f64) -> f64 + Sync),
    n_paths: usize,
    n_steps: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_positive("t", t)?;
    check_positive("x0", x0)?;
    if n_paths == 0 || n_steps == 0 {
        return Err(Error::InvalidParameter {
            name: "n_paths",
            value: n_paths.min(n_steps) as f64,
            reason: "need at least one path and one step",
        });
    }
    let dt = t / n_steps as f64;
    let chi = ChiSquared::new(m.alpha()).map_err(|_| Error::InvalidParameter {
        name: "alpha",
        value: m.alpha(),
        reason: "invalid chi-square degrees of freedom",
    })?;
    let workers = n_paths.div_ceil(PATHS_PER_WORKER);
    let chunks: Vec<Result<Vec<f64>>> = (0..workers)
        .into_par_iter()
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(w as u64);
            let count = PATHS_PER_WORKER.min(n_paths - w * PATHS_PER_WORKER);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let mut x2 = x0 * x0;
                let mut v_prev = v.value(x0);
                let mut action = 0.0;
                for k in 0..n_steps {
                    let lambda = x2 / (2.0 * dt);
                    let z: f64 = rng.sample(StandardNormal);
                    let chi2 = chi.sample(&mut rng);
                    x2 = 2.0 * dt * ((z + lambda.sqrt()).powi(2) + chi2);
                    let v_next = v.value(x2.sqrt());
                    action += 0.5 * dt * (v_prev + v_next);
                    if !action.is_finite() {
                        return Err(Error::PathOverflow { t: (k + 1) as f64 * dt });
                    }
                    v_prev = v_next;
                }
                out.push((-action).exp() * f(x2.sqrt()));
            }
            Ok(out)
        })
        .collect();
    let mut weights = Vec::with_capacity(n_paths);
    for c in chunks {
        weights.extend(c?);
    }
    let n = weights.len() as f64;
    let mean = neumaier(weights.iter().copied()) / n;
    let var = if weights.len() > 1 {
        neumaier(weights.iter().map(|w| (w - mean).powi(2))) / (n - 1.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        stderr: (var / n).sqrt(),
        n_paths,
        n_steps,
        seed,
    })
}

fn neumaier(it: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in it {
        let s = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - s) + x } else { (x - s) + sum };
        sum = s;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_weights() {
        let m = WeightedMeasure::new(0.5).unwrap();
        let one = |_: f64| 1.0;
        let e = feynman_kac(&m, &Potential::zero(), 1.0, 1.0, &one, 5000, 10, 3).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
        let c = feynman_kac(&m, &Potential::constant(0.5), 2.0, 1.0, &one, 5000, 10, 3).unwrap();
        assert!((c.mean - (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn reproducible() {
        let m = WeightedMeasure::new(0.3).unwrap();
        let v = Potential::piecewise(&m, &[(0.0, 1.0, 2.0)]).unwrap();
        let f = |x: f64| x;
        let a = feynman_kac(&m, &v, 0.5, 0.7, &f, 9000, 20, 11).unwrap();
        let b = feynman_kac(&m, &v, 0.5, 0.7, &f, 9000, 20, 11).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }
}
