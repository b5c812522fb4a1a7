mod common;

use bessel_hardy::grid::{Grid, GridFunction, GridSpec};
use bessel_hardy::kernel::{heat_apply, KernelEval};
use bessel_hardy::measure::{Potential, WeightedMeasure};
use bessel_hardy::semigroup::*;
use common::{random_potential, simpson_weighted};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn grid(m: &WeightedMeasure, v: &Potential, cells: usize) -> Arc<Grid> {
    Grid::build(m, GridSpec::new(cells, 12.0, 1.03).unwrap(), &v.breakpoints()).unwrap()
}

fn gaussian(c: f64) -> impl Fn(f64) -> f64 {
    move |x| (-(x - c).powi(2)).exp()
}

#[test]
fn domination_and_contraction_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let m = WeightedMeasure::new(0.5).unwrap();
    let g = Grid::build(&m, GridSpec::new(300, 12.0, 1.05).unwrap(), &[]).unwrap();
    for _ in 0..20 {
        let v = random_potential(&m, &mut rng);
        let t = rng.random_range(0.01..2.0);
        let c = rng.random_range(0.0..6.0);
        let f = GridFunction::from_fn(g.clone(), gaussian(c));
        let p = Propagator::new(g.clone(), &v).unwrap();
        let n = SplittingScheme::default().steps(t);
        let k = p.evolve(&f, t, n).unwrap();
        let free = p.evolve_free(&f, t, n).unwrap();
        for (a, b) in k.values().iter().zip(free.values()) {
            assert!(0.0 <= *a && a <= b, "{a} {b}");
        }
        assert!(k.l1_norm() <= f.l1_norm());
    }
}

#[test]
fn free_steps_approach_the_single_step_kernel() {
    let m = WeightedMeasure::new(0.5).unwrap();
    let gaps: Vec<f64> = [150, 300, 600]
        .iter()
        .map(|&cells| {
            let g = Grid::build(&m, GridSpec::new(cells, 12.0, 1.05).unwrap(), &[]).unwrap();
            let f = GridFunction::from_fn(g.clone(), gaussian(2.0));
            let p = Propagator::new(g, &Potential::zero()).unwrap();
            let stepped = p.evolve_free(&f, 1.0, 16).unwrap();
            stepped.axpy(-1.0, &heat_apply(1.0, &f).unwrap()).unwrap().l1_norm()
        })
        .collect();
    // each projection smooths by about h²/12, so the gap is second order in h
    for w in gaps.windows(2) {
        assert!(w[1] < 0.3 * w[0], "{gaps:?}");
    }
}

#[test]
fn constant_potential_oracle() {
    let m = WeightedMeasure::new(0.7).unwrap();
    let v = Potential::constant(0.9);
    let g = grid(&m, &v, 400);
    let f = GridFunction::from_fn(g.clone(), gaussian(2.0));
    let k = schrodinger_apply(&v, 1.3, &f, &SplittingScheme::default()).unwrap();
    let h = heat_apply(1.3, &f).unwrap();
    let d = (-0.9f64 * 1.3).exp();
    for (a, b) in k.values().iter().zip(h.values()) {
        assert!((a - d * b).abs() <= 1e-10 * d * b.abs() + 1e-300);
    }
    let one = |_: f64| 1.0;
    let e = feynman_kac(&m, &v, 1.3, 0.8, &one, 10_000, 8, 1).unwrap();
    assert!((e.mean - d).abs() <= 3.0 * e.stderr + 1e-14);
}

#[test]
fn half_steps_compose_within_the_self_convergence_envelope() {
    let m = WeightedMeasure::new(0.5).unwrap();
    let v = Potential::piecewise(&m, &[(0.5, 1.5, 2.0), (2.0, 3.0, 0.7)]).unwrap();
    let g = grid(&m, &v, 800);
    let f = GridFunction::from_fn(g.clone(), gaussian(1.5));
    let s = SplittingScheme::new(32.0, 4).unwrap();
    let fine = SplittingScheme::new(64.0, 4).unwrap();
    let once = schrodinger_apply(&v, 1.0, &f, &s).unwrap();
    let half = schrodinger_apply(&v, 0.5, &f, &s).unwrap();
    let twice = schrodinger_apply(&v, 0.5, &half, &s).unwrap();
    let envelope = once.axpy(-1.0, &schrodinger_apply(&v, 1.0, &f, &fine).unwrap()).unwrap().l1_norm();
    let gap = once.axpy(-1.0, &twice).unwrap().l1_norm();
    assert!(gap <= envelope, "{gap:e} > {envelope:e}");
}

#[test]
fn splitting_converges_in_the_step_count() {
    let m = WeightedMeasure::new(0.5).unwrap();
    let v = Potential::piecewise(&m, &[(0.5, 1.5, 2.0), (2.0, 3.0, 0.7)]).unwrap();
    let g = grid(&m, &v, 600);
    let f = GridFunction::from_fn(g.clone(), gaussian(1.5));
    let p = Propagator::new(g.clone(), &v).unwrap();
    let runs: Vec<GridFunction> = [4, 8, 16, 32].iter().map(|&n| p.evolve(&f, 1.0, n).unwrap()).collect();
    let gaps: Vec<f64> = runs.windows(2).map(|w| w[0].axpy(-1.0, &w[1]).unwrap().l1_norm()).collect();
    for w in gaps.windows(2) {
        let order = (w[0] / w[1]).log2();
        // Jumps in V cost Strang splitting its second order; about 1.3 is observed.
        assert!(order > 1.0, "{gaps:?}");
    }
}

#[test]
fn bessel_sampler_marginal() {
    let m = WeightedMeasure::new(0.4).unwrap();
    let (x0, t, n) = (0.8, 0.6, 20_000);
    let k = KernelEval::new(&m, t).unwrap();
    let qs: Vec<f64> = (1..40).map(|i| 0.08 * i as f64).collect();
    for steps in [1, 5] {
        let mut worst = 0.0f64;
        for &q in &qs {
            let below = move |x: f64| if x <= q { 1.0 } else { 0.0 };
            let emp = feynman_kac(&m, &Potential::zero(), t, x0, &below, n, steps, 9).unwrap().mean;
            let exact = simpson_weighted(0.4, q, 4000, |y| k.value(x0, y));
            worst = worst.max((emp - exact).abs());
        }
        // 1% critical value of the Kolmogorov–Smirnov statistic.
        assert!(worst < 1.63 / (n as f64).sqrt(), "steps {steps}: {worst}");
    }
}

#[test]
fn monte_carlo_agrees_with_the_grid() {
    let m = WeightedMeasure::new(0.5).unwrap();
    let v = Potential::piecewise(&m, &[(0.5, 1.5, 2.0), (2.0, 3.0, 0.7)]).unwrap();
    let f = gaussian(1.5);
    for (x0, t) in [(1.0, 0.5), (2.5, 0.2)] {
        let mc = feynman_kac(&m, &v, t, x0, &f, 40_000, 200, 4).unwrap();
        let g = Grid::build(&m, GridSpec::new(800, 10.0, 1.025).unwrap(), &[v.breakpoints(), vec![x0]].concat()).unwrap();
        let k = schrodinger_apply(&v, t, &GridFunction::from_fn(g, &f), &SplittingScheme::new(64.0, 4).unwrap()).unwrap();
        let gap = (mc.mean - k.interpolate(x0)).abs();
        assert!(gap <= 3.0 * mc.stderr + 1e-3, "x0={x0} t={t}: {gap:e} vs {:e}", mc.stderr);
    }
}

#[test]
fn perturbation_identity_on_a_piecewise_potential() {
    let m = WeightedMeasure::new(0.5).unwrap();
    let v = Potential::piecewise(&m, &[(0.5, 1.5, 2.0)]).unwrap();
    let g = grid(&m, &v, 300);
    let (i, j) = (g.nearest_node(1.0), g.nearest_node(1.3));
    let r = perturbation_residual(&g, &v, 0.5, i, j, 16).unwrap();
    assert!(r.lhs > 0.0 && r.residual < 1e-2 * r.lhs, "{r:?}");
    assert!(((r.p - r.p_direct) / r.p_direct).abs() < 1e-2, "{r:?}");
}
