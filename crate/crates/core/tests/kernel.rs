mod common;

use bessel_hardy::grid::{Grid, GridFunction, GridSpec};
use bessel_hardy::kernel::*;
use bessel_hardy::measure::WeightedMeasure;
use common::{i_half_scaled, i_three_halves_scaled, simpson_weighted};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn half_integer_orders() {
    for (order, oracle) in [(0.5, i_half_scaled as fn(f64) -> f64), (1.5, i_three_halves_scaled)] {
        let mut z = 1e-6;
        while z <= 700.0 {
            let got = bessel_i_scaled(order, z).unwrap();
            let want = oracle(z);
            assert!(((got - want) / want).abs() < 1e-12, "order {order} z={z}: {got} vs {want}");
            z *= 1.07;
        }
    }
}

#[test]
fn seam_is_continuous() {
    for order in [-0.35, 0.0, 0.5, 1.5, 3.0] {
        let b = ScaledBessel::new(order).unwrap();
        let s = b.seam();
        let (below, at) = (b.scaled(s * (1.0 - 1e-15)), b.scaled(s));
        assert!(((below - at) / at).abs() < 1e-12, "order {order}: {below} vs {at}");
    }
    assert!(bessel_i_scaled(0.5, -1.0).is_err());
    assert!(ScaledBessel::new(-1.5).is_err());
}

#[test]
fn symmetry_and_positivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..2000 {
        let m = WeightedMeasure::new(rng.random_range(0.05..3.0)).unwrap();
        let t = 10f64.powf(rng.random_range(-3.0..2.0));
        let k = KernelEval::new(&m, t).unwrap();
        let x = 10f64.powf(rng.random_range(-3.0..2.0));
        let y = x + rng.random_range(-1.0..1.0) * t.sqrt() * 3.0;
        let y = y.abs();
        let (p, q) = (heat_kernel(&k, x, y), heat_kernel(&k, y, x));
        assert!(p > 0.0);
        assert!(((p - q) / p).abs() < 1e-12);
    }
}

#[test]
fn normalisation_by_independent_quadrature() {
    for alpha in [0.3, 1.0, 2.0] {
        let m = WeightedMeasure::new(alpha).unwrap();
        for (t, y) in [(0.1, 0.5), (1.0, 1.0), (2.0, 4.0)] {
            let k = KernelEval::new(&m, t).unwrap();
            let r = y + 14.0 * t.sqrt();
            let mass = simpson_weighted(alpha, r, 20_000, |x| k.value(x, y));
            assert!((mass - 1.0).abs() < 1e-7, "alpha {alpha} t {t}: {mass}");
        }
    }
}

#[test]
fn chapman_kolmogorov() {
    for alpha in [0.5, 1.7] {
        let m = WeightedMeasure::new(alpha).unwrap();
        for (t, s, x, y) in [(0.3f64, 0.7, 0.4f64, 1.1f64), (1.0, 0.25, 2.0, 1.5), (0.05, 0.05, 0.1, 0.3)] {
            let (kt, ks, kts) = (
                KernelEval::new(&m, t).unwrap(),
                KernelEval::new(&m, s).unwrap(),
                KernelEval::new(&m, t + s).unwrap(),
            );
            let r = x.max(y) + 14.0 * (t + s).sqrt();
            let composed = simpson_weighted(alpha, r, 20_000, |z| kt.value(x, z) * ks.value(z, y));
            let direct = kts.value(x, y);
            assert!(((composed - direct) / direct).abs() < 1e-7, "{composed} vs {direct}");
        }
    }
}

fn bump(x: f64) -> f64 {
    let u = (x - 2.0) / 1.2;
    if u.abs() < 1.0 {
        (1.0 - u * u).powi(3)
    } else {
        0.0
    }
}

#[test]
fn heat_apply_semigroup_law_and_continuity() {
    let m = WeightedMeasure::new(0.5).unwrap();
    let g = Grid::build(&m, GridSpec::new(1200, 12.0, 1.03).unwrap(), &[]).unwrap();
    let f = GridFunction::from_fn(g.clone(), bump);
    let once = heat_apply(0.5, &f).unwrap();
    let twice = heat_apply(0.25, &heat_apply(0.25, &f).unwrap()).unwrap();
    let diff = once.axpy(-1.0, &twice).unwrap().l1_norm();
    assert!(diff < 1e-4 * f.l1_norm(), "{diff}");

    let short = heat_apply(1e-4, &f).unwrap();
    let drift = short.axpy(-1.0, &f).unwrap().l1_norm();
    assert!(drift < 2e-3 * f.l1_norm(), "{drift}");
}

#[test]
fn gaussian_sandwich_on_a_small_sample() {
    let m = WeightedMeasure::new(0.5).unwrap();
    let spec = SampleSpec {
        samples: 1500,
        ..SampleSpec::default()
    };
    let report = gaussian_bound_constants(&m, spec).unwrap();
    assert!(report.holds(), "{report:?}");
    assert!(report.c1 < 4.0 && report.c2 > 4.0);
    assert_eq!(count_violations(&m, &report, SampleSpec { seed: 2, ..spec }).unwrap(), 0);
}
