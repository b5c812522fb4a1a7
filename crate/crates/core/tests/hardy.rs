use bessel_hardy::grid::{Grid, GridFunction, GridSpec};
use bessel_hardy::hardy::*;
use bessel_hardy::kernel::heat_apply;
use bessel_hardy::measure::{Interval, LengthConvention, Potential, WeightedMeasure};
use bessel_hardy::section::{build_section, DEFAULT_BETA};
use bessel_hardy::semigroup::SplittingScheme;
use bessel_hardy::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn setup() -> (WeightedMeasure, Arc<Grid>) {
    let m = WeightedMeasure::new(0.5).unwrap();
    let breaks: Vec<f64> = (1..16).map(|k| k as f64 * 0.5).collect();
    let g = Grid::build(&m, GridSpec::new(500, 12.0, 1.05).unwrap(), &breaks).unwrap();
    (m, g)
}

fn host(lo: f64, hi: f64) -> Host {
    Host {
        interval: Interval::of(lo, hi),
        beta: DEFAULT_BETA,
    }
}

#[test]
fn atom_kinds_meet_their_conditions() {
    let (_, g) = setup();
    let local = Atom::local(&g, host(1.0, 1.5)).unwrap();
    local.validate().unwrap();
    assert!((local.values().integral() - 1.0).abs() < 1e-13);
    assert!((local.values().sup_norm() * local.support_mass() - 1.0).abs() < 1e-13);

    let mu = Atom::mu(&g, &Interval::of(2.0, 3.0), &|x| x.sin()).unwrap();
    mu.validate().unwrap();
    assert_eq!(mu.kind(), AtomKind::Mu);
    assert!(mu.values().integral().abs() <= CANCELLATION * mu.values().l1_norm());
    assert!((mu.values().sup_norm() * mu.support_mass() - 1.0).abs() < 1e-13);
    assert!(mu.values().l1_norm() <= 1.0 + 1e-13);

    let h = host(1.0, 1.5);
    let inside = Interval::of(1.0, 1.4);
    let c = Atom::cancellative(&g, h, &inside, &|x| x).unwrap();
    c.validate().unwrap();
    let far = Interval::of(2.0, 2.5);
    assert!(matches!(Atom::cancellative(&g, h, &far, &|x| x), Err(Error::SupportViolation { .. })));
    assert!(Atom::mu(&g, &inside, &|_| 2.0).is_err());
}

#[test]
fn synthesis_and_certificates() {
    let (_, g) = setup();
    let a = Atom::mu(&g, &Interval::of(0.5, 2.0), &|x| x * x).unwrap();
    let (f, c) = atomic_synthesize(&AtomicCombination::new(vec![(1.0, a.clone())])).unwrap();
    assert_eq!(f.values(), a.values().values());
    assert_eq!(c, 1.0);

    let (f, c) = atomic_synthesize(&AtomicCombination::new(vec![(0.7, a.clone()), (-0.7, a)])).unwrap();
    assert!(f.values().iter().all(|&x| x == 0.0));
    assert!((c - 1.4).abs() < 1e-15);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let terms = (0..10)
        .map(|_| {
            let lo = rng.random_range(0.0..8.0);
            let len = rng.random_range(0.2..3.0);
            let freq = rng.random_range(0.5..6.0);
            let atom = Atom::mu(&g, &Interval::of(lo, lo + len), &move |x| (freq * x).cos()).unwrap();
            (rng.random_range(-2.0..2.0), atom)
        })
        .collect();
    let (f, c) = atomic_synthesize(&AtomicCombination::new(terms)).unwrap();
    assert!(f.l1_norm() <= c * (1.0 + 1e-12));
}

#[test]
fn atoms_on_other_grids_are_rejected() {
    let (m, g) = setup();
    let g2 = Grid::build(&m, GridSpec::new(200, 12.0, 1.05).unwrap(), &[]).unwrap();
    let a = Atom::local(&g, host(1.0, 1.5)).unwrap();
    let b = Atom::local(&g2, host(1.0, 1.5)).unwrap();
    let combo = AtomicCombination::new(vec![(1.0, a), (1.0, b)]);
    assert!(matches!(atomic_synthesize(&combo), Err(Error::MixedGrids)));
}

#[test]
fn partition_of_unity_sums_to_one() {
    let m = WeightedMeasure::new(0.5).unwrap();
    let v = Potential::power(&m, 1.0, 1.0).unwrap();
    let s = build_section(&m, &v, &Interval::of(0.0, 8.0), LengthConvention::default()).unwrap();
    let bumps = partition_of_unity(&s);
    assert_eq!(bumps.len(), s.len());
    let beta = s.beta;
    for k in 1..4000 {
        let x = 8.0 * k as f64 / 4000.0;
        let total: f64 = bumps.iter().map(|b| b.value(x)).sum();
        assert!((total - 1.0).abs() < 1e-12, "x={x} sum={total}");
    }
    for b in &bumps {
        let star = Host {
            interval: b.host,
            beta,
        }
        .star();
        assert!(b.support().is_subset_of(&star), "{:?}", b);
        assert!(b.slope_constant() <= 3.0 / (beta - 1.0) * (1.0 + 1e-12));
        let (lo, hi) = (b.support().lo(), b.support().hi());
        for k in 1..50 {
            let x = lo + (hi - lo) * k as f64 / 50.0;
            let h = 1e-6 * b.host.len();
            let fd = (b.value(x + h) - b.value(x - h)) / (2.0 * h);
            assert!((fd - b.derivative(x)).abs() < 1e-4 * b.slope_constant() / b.host.len() + 1e-6);
        }
    }
}

#[test]
fn cutoff_envelope() {
    let h = host(2.0, 2.5);
    let psi = Cutoff::for_host(&h).unwrap();
    let (star, outer) = (h.star(), h.double_star());
    for k in 0..=200 {
        let x = 1.5 + 1.5 * k as f64 / 200.0;
        let v = psi.value(x);
        assert!((0.0..=1.0).contains(&v));
        if star.contains(x) {
            assert_eq!(v, 1.0);
        }
        if !outer.contains(x) {
            assert_eq!(v, 0.0);
        }
        assert!(psi.derivative(x).abs() <= psi.max_slope() * (1.0 + 1e-12));
    }
    let left = Cutoff::for_host(&host(0.0, 0.5)).unwrap();
    assert_eq!(left.value(0.0), 1.0);
    assert!(Cutoff::new(Interval::of(1.0, 3.0), Interval::of(1.5, 2.0)).is_err());
}

#[test]
fn csv_round_trip() {
    let (_, g) = setup();
    let a = Atom::cancellative(&g, host(1.0, 1.5), &Interval::of(1.0, 1.5), &|x| (5.0 * x).sin()).unwrap();
    let b = Atom::local(&g, host(3.0, 3.5)).unwrap();
    let combo = AtomicCombination::new(vec![(0.25, a), (-1.5, b)]);
    let text = combination_to_csv(&combo);
    let back = combination_from_csv(&g, &text).unwrap();
    assert_eq!(back.terms.len(), 2);
    for ((l, a), (l2, a2)) in combo.terms.iter().zip(&back.terms) {
        assert_eq!(l, l2);
        assert_eq!(a.kind(), a2.kind());
        assert_eq!(a.cells(), a2.cells());
        assert_eq!(a.values().values(), a2.values().values());
    }
    let (l, single) = atom_from_csv(&g, &atom_to_csv(3.0, &combo.terms[1].1)).unwrap();
    assert_eq!(l, 3.0);
    assert_eq!(single.kind(), AtomKind::Local);
    assert!(combination_from_csv(&g, "# {}\nnode,value\n").is_err());
}

#[test]
fn resupport_reconstructs_a_straddling_atom() {
    let (_, g) = setup();
    let h = host(2.0, 2.5);
    let psi = Cutoff::for_host(&h).unwrap();
    let slope = psi.max_slope() * h.interval.len();
    let a = Atom::mu(&g, &Interval::of(2.3, 4.0), &|x| (3.0 * x).cos()).unwrap();
    let r = resupport_atom(&a, &h, &psi, slope).unwrap();
    let rebuilt = r.synthesize(a.values()).unwrap();
    let scale = a.values().sup_norm();
    for (i, &x) in g.nodes().iter().enumerate() {
        let expect = psi.value(x) * a.values().values()[i];
        assert!((rebuilt.values()[i] - expect).abs() <= 1e-12 * scale, "x={x}");
    }
    for (_, b) in &r.terms {
        b.validate().unwrap();
        assert!(matches!(b.kind(), AtomKind::Cancellative | AtomKind::Local));
    }
    assert_eq!(r.terms.last().unwrap().1.kind(), AtomKind::Local);
    assert!(r.certificate() < 10.0);

    let inside = Atom::mu(&g, &Interval::of(2.0, 2.5), &|x| x).unwrap();
    let same = resupport_atom(&inside, &h, &psi, slope).unwrap();
    assert_eq!(same.terms.len(), 1);
    let outside = Atom::mu(&g, &Interval::of(6.0, 7.0), &|x| x).unwrap();
    assert!(resupport_atom(&outside, &h, &psi, slope).unwrap().terms.is_empty());
    assert!(resupport_atom(&a, &h, &psi, 0.5 * slope).is_err());
}

#[test]
fn time_grids() {
    let t = TimeGrid::log_spaced(1.0, 16.0, 4).unwrap();
    assert_eq!(t.len(), 17);
    assert!((t.times()[16] - 16.0).abs() < 1e-12);
    assert!(TimeGrid::log_spaced(2.0, 1.0, 4).is_err());
    let u = TimeGrid::octave_uniform(1.0, 8.0, 4).unwrap();
    let gaps: Vec<f64> = u.times().windows(2).map(|w| w[1] - w[0]).collect();
    assert!((gaps[0] - 0.25).abs() < 1e-12 && (gaps.last().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn local_atoms_have_bounded_local_norm_and_grow_globally() {
    let m = WeightedMeasure::new(0.5).unwrap();
    let g = Grid::build(&m, GridSpec::new(700, 120.0, 1.04).unwrap(), &[1.0, 1.5]).unwrap();
    let a = Atom::local(&g, host(1.0, 1.5)).unwrap();
    let zero = Potential::zero();
    let scheme = SplittingScheme::default();
    let local = hardy_norm_local(&zero, a.values(), 0.5, 8, &scheme).unwrap();
    assert!(local.norm > 1.0 && local.norm < 3.0, "{local:?}");
    assert!(local.truncation_sensitivity() < 0.1);

    // sup_t P_t a decays like μ(B(x, x))^{-1} far out, so the global norm grows like log t_max.
    let norms: Vec<f64> = [4.0, 16.0, 64.0]
        .iter()
        .map(|&t| hardy_norm(&zero, a.values(), 1e-3, t, 8, &scheme).unwrap().norm)
        .collect();
    let (d1, d2) = (norms[1] - norms[0], norms[2] - norms[1]);
    assert!(d1 > 0.1 && d2 > 0.1, "{norms:?}");
    assert!((d2 / d1 - 1.0).abs() < 0.5, "{norms:?}");

    let times = TimeGrid::log_spaced(1e-3, 1.0, 8).unwrap();
    let mf = maximal_function(&zero, a.values(), &times, &scheme).unwrap();
    for &t in [times.times()[0], times.times()[40], times.times()[times.len() - 1]].iter() {
        let slice: GridFunction = heat_apply(t, a.values()).unwrap();
        assert!(mf.values().iter().zip(slice.values()).all(|(m, v)| *m >= v.abs() * (1.0 - 1e-12)));
    }
}
