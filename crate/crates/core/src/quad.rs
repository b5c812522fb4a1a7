//! Quadrature rules: Gauss–Legendre panels, Gauss–Jacobi endpoint panels for the
//! `x^p` weight at the origin, and adaptive Gauss–Kronrod integration.

use crate::error::{Error, Result};
use gauss_quad::{GaussJacobi, GaussLegendre};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights on `[-1, 1]`.
pub(crate) type Rule = Arc<Vec<(f64, f64)>>;

/// Gauss–Legendre rule with `n` points on `[-1, 1]`.
pub(crate) fn legendre(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut map = cache.lock().unwrap();
    map.entry(n)
        .or_insert_with(|| {
            let rule = GaussLegendre::new(n.try_into().expect("n >= 2"));
            let mut v: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
            v.sort_by(|p, q| p.0.total_cmp(&q.0));
            Arc::new(v)
        })
        .clone()
}

/// Nodes and weights for `∫_0^1 x^p g(x) dx ≈ Σ w g(x)`.
///
/// Only even degrees are used: the generator pins the middle node of odd-degree rules
/// to 0, which is wrong for an asymmetric weight.
pub(crate) fn jacobi_origin(p: f64, n: usize) -> Rule {
    assert!(n.is_multiple_of(2) && p > -1.0);
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut map = cache.lock().unwrap();
    map.entry((p.to_bits(), n))
        .or_insert_with(|| {
            let scale = 0.5f64.powf(p + 1.0);
            let rule = if p == 0.0 {
                legendre(n).iter().map(|&(u, w)| (0.5 * (1.0 + u), 0.5 * w)).collect()
            } else {
                let gj = GaussJacobi::new(
                    n.try_into().expect("n >= 2"),
                    0.0.try_into().unwrap(),
                    p.try_into().expect("p > -1"),
                );
                let mut v: Vec<(f64, f64)> =
                    gj.iter().map(|(u, w)| (0.5 * (1.0 + *u), scale * *w)).collect();
                v.sort_by(|p, q| p.0.total_cmp(&q.0));
                v
            };
            Arc::new(rule)
        })
        .clone()
}

/// `∫_a^b f` with a fixed Gauss–Legendre rule.
pub(crate) fn gauss<F: FnMut(f64) -> f64>(rule: &[(f64, f64)], a: f64, b: f64, mut f: F) -> f64 {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    rule.iter().map(|&(u, w)| w * f(m + h * u)).sum::<f64>() * h
}

/// `∫_0^h x^p g(x) dx` with a rule from [`jacobi_origin`].
pub(crate) fn gauss_origin<F: FnMut(f64) -> f64>(rule: &[(f64, f64)], p: f64, h: f64, mut g: F) -> f64 {
    rule.iter().map(|&(x, w)| w * g(h * x)).sum::<f64>() * h.powf(p + 1.0)
}

/// `∫_a^b f(y) y^p dy` by fixed rules: a Gauss–Jacobi panel at the origin when `a = 0`
/// and Gauss–Legendre subpanels of width at most `scale` elsewhere.
pub(crate) fn power_weighted<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, p: f64, scale: f64, n: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut total = 0.0;
    let mut lo = a;
    if a == 0.0 {
        let h = b.min(scale);
        total += gauss_origin(&jacobi_origin(p, n + n % 2), p, h, &mut f);
        lo = h;
    }
    if b > lo {
        let rule = legendre(n);
        let pieces = ((b - lo) / scale).ceil().max(1.0) as usize;
        let w = (b - lo) / pieces as f64;
        for k in 0..pieces {
            let s = lo + k as f64 * w;
            let e = if k + 1 == pieces { b } else { s + w };
            total += gauss(&rule, s, e, |y| f(y) * y.powf(p));
        }
    }
    total
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 15-point panel: (integral, error estimate).
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Globally adaptive Gauss–Kronrod integration over the union of the given panels.
///
/// Stops when the summed error estimate is below `tol`; fails after `budget` panels.
pub(crate) fn adaptive<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], tol: f64, budget: usize) -> Result<Estimate> {
    let mut panels: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let error: f64 = panels.iter().map(|p| p.3).sum();
        let value: f64 = panels.iter().map(|p| p.2).sum();
        if error <= tol {
            return Ok(Estimate { value, error, panels: panels.len() });
        }
        if panels.len() >= budget {
            return Err(Error::NonConvergence { tolerance: tol, estimate: error, budget });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|p, q| p.1 .3.total_cmp(&q.1 .3))
            .map(|(i, _)| i)
            .expect("nonempty");
        let (a, b, _, _) = panels.swap_remove(worst);
        let m = 0.5 * (a + b);
        for (s, e) in [(a, m), (m, b)] {
            let (v, err) = gk15(&mut f, s, e);
            panels.push((s, e, v, err));
        }
    }
}
