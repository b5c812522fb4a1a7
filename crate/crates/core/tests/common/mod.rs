#![allow(dead_code)]

use bessel_hardy::measure::{Potential, WeightedMeasure};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Up to four constant pieces with breakpoints on multiples of 1/4 in `[0, 8]`.
pub fn random_pieces(rng: &mut ChaCha8Rng) -> Vec<(f64, f64, f64)> {
    let count = rng.random_range(1..=4);
    let mut cuts: Vec<u32> = (0..2 * count).map(|_| rng.random_range(0..=32)).collect();
    cuts.sort_unstable();
    cuts.dedup();
    cuts.chunks(2)
        .filter(|c| c.len() == 2)
        .map(|c| (c[0] as f64 / 4.0, c[1] as f64 / 4.0, rng.random_range(0.2..6.0)))
        .collect()
}

/// A piecewise-constant potential that is positive somewhere.
pub fn random_potential(m: &WeightedMeasure, rng: &mut ChaCha8Rng) -> Potential {
    loop {
        let pieces = random_pieces(rng);
        if !pieces.is_empty() {
            return Potential::piecewise(m, &pieces).unwrap();
        }
    }
}

/// `∫_a^b x^α dx`, straight from the antiderivative.
pub fn mass(alpha: f64, a: f64, b: f64) -> f64 {
    (b.powf(1.0 + alpha) - a.powf(1.0 + alpha)) / (1.0 + alpha)
}

/// The stopping functional for piecewise-constant `V`, with `2I = B(c, |I|) ∩ (0, ∞)`.
pub fn stopping_functional(alpha: f64, pieces: &[(f64, f64, f64)], lo: f64, hi: f64, nominal: bool) -> f64 {
    let (c, r) = (0.5 * (lo + hi), hi - lo);
    let (a, b) = ((c - r).max(0.0), c + r);
    let len = if nominal { 2.0 * r } else { b - a };
    let load: f64 = pieces
        .iter()
        .map(|&(p, q, v)| {
            let (s, e) = (p.max(a), q.min(b));
            if e > s {
                v * mass(alpha, s, e)
            } else {
                0.0
            }
        })
        .sum();
    len * len * load / mass(alpha, a, b)
}

/// `e^{-z} I_{1/2}(z)`.
pub fn i_half_scaled(z: f64) -> f64 {
    (2.0 / (PI * z)).sqrt() * (-(-2.0 * z).exp_m1()) / 2.0
}

/// `e^{-z} I_{3/2}(z)`; a Taylor series in place of the cancelling closed form for small `z`.
pub fn i_three_halves_scaled(z: f64) -> f64 {
    let core = if z < 0.5 {
        // cosh z - sinh z / z = Σ_{k≥1} 2k z^{2k} / (2k+1)!
        let sum: f64 = (1..20).map(|k| 2.0 * k as f64 * z.powi(2 * k) / factorial(2 * k as usize + 1)).sum();
        (-z).exp() * sum
    } else {
        0.5 * (1.0 + (-2.0 * z).exp()) + (-2.0 * z).exp_m1() / (2.0 * z)
    };
    (2.0 / (PI * z)).sqrt() * core
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `∫_0^R f(x) x^α dx` with `x = s²` and composite Simpson's rule in `s`.
pub fn simpson_weighted(alpha: f64, r: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = n + n % 2;
    let h = r.sqrt() / n as f64;
    let g = |s: f64| {
        let x = s * s;
        2.0 * f(x) * s.powf(2.0 * alpha + 1.0)
    };
    let mut total = g(0.0) + g(n as f64 * h);
    for k in 1..n {
        total += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * h);
    }
    total * h / 3.0
}
