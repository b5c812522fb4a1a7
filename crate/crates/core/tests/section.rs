mod common;

use bessel_hardy::measure::{Interval, LengthConvention, Potential, WeightedMeasure};
use bessel_hardy::section::*;
use bessel_hardy::Error;
use common::{random_pieces, stopping_functional};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_family() -> Vec<DyadicInterval> {
    let mut v = vec![DyadicInterval::left(-1)];
    v.extend((1..8).map(|k| DyadicInterval::standard(k, -1).unwrap()));
    v
}

#[test]
fn constant_potential_gives_half_unit_intervals() {
    let m = WeightedMeasure::new(0.5).unwrap();
    for convention in [LengthConvention::Nominal, LengthConvention::Truncated] {
        let s = build_section(&m, &Potential::constant(1.0), &Interval::of(0.0, 4.0), convention).unwrap();
        assert_eq!(s.intervals, unit_family(), "{convention:?}");
        assert_eq!(s.c0, 1.0);
        let report = validate_section(&s);
        assert!(report.passed(), "{report:?}");
        assert!(stopping_rule_violations(&m, &Potential::constant(1.0), &s).is_empty());
    }
}

#[test]
fn hand_built_overlap_fails() {
    let family = [Interval::of(0.5, 1.5), Interval::of(1.0, 2.0)];
    let r = validate_family(&family, &Interval::of(0.5, 2.0), DEFAULT_BETA);
    assert!(!r.disjoint);
    assert_eq!(r.overlap, Some((family[0], family[1])));
    assert!(!r.passed());
}

#[test]
fn inverse_power_section() {
    let m = WeightedMeasure::new(0.5).unwrap();
    let v = Potential::power(&m, 1.0, 1.0).unwrap();
    let s = build_section(&m, &v, &Interval::of(0.0, 8.0), LengthConvention::default()).unwrap();
    let r = validate_section(&s);
    assert!(r.passed(), "{r:?}");
    assert!(r.c0.is_finite() && r.c0 >= 1.0);
    assert!(stopping_rule_violations(&m, &v, &s).is_empty());
    let lens: Vec<f64> = s.iter().map(|d| d.len()).collect();
    assert!(lens.windows(2).all(|w| w[1] >= w[0]), "{lens:?}");
}

#[test]
fn degenerate_and_non_integrable_potentials() {
    let m = WeightedMeasure::new(0.5).unwrap();
    let w = Interval::of(0.0, 4.0);
    assert!(matches!(
        build_section(&m, &Potential::zero(), &w, LengthConvention::default()),
        Err(Error::DegeneratePotential { .. })
    ));
    assert!(matches!(Potential::power(&m, 1.0, 2.0), Err(Error::NonLocallyIntegrable { .. })));
}

#[test]
fn randomized_sections_obey_the_stopping_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let alpha = rng.random_range(0.1..0.9);
        let m = WeightedMeasure::new(alpha).unwrap();
        let pieces = random_pieces(&mut rng);
        if pieces.is_empty() {
            continue;
        }
        let v = Potential::piecewise(&m, &pieces).unwrap();
        let window = Interval::of(0.0, 8.0);
        for convention in [LengthConvention::Nominal, LengthConvention::Truncated] {
            let s = match build_section(&m, &v, &window, convention) {
                Ok(s) => s,
                Err(Error::Unresolved { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let nominal = convention == LengthConvention::Nominal;
            for d in s.iter() {
                let (i, p) = (d.interval(), d.parent().interval());
                let f = stopping_functional(alpha, &pieces, i.lo(), i.hi(), nominal);
                let fp = stopping_functional(alpha, &pieces, p.lo(), p.hi(), nominal);
                assert!(f <= 1.0 + 1e-12 && fp > 1.0 - 1e-12, "{d}: {f} {fp}");
            }
            assert!(validate_family(&s.iter().map(|d| d.interval()).collect::<Vec<_>>(), &window, s.beta).covers);
            assert!(stopping_rule_violations(&m, &v, &s).is_empty());
        }
    }
}

#[test]
fn functional_grows_toward_the_parent() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..1000 {
        let m = WeightedMeasure::new(rng.random_range(0.05..0.95)).unwrap();
        let v = common::random_potential(&m, &mut rng);
        let n = rng.random_range(-6..3);
        let d = if rng.random_bool(0.2) {
            DyadicInterval::left(n)
        } else {
            DyadicInterval::standard(rng.random_range(1..40), n).unwrap()
        };
        for c in [LengthConvention::Nominal, LengthConvention::Truncated] {
            let f = s_functional(&m, &v, &d.interval(), c);
            let fp = s_functional(&m, &v, &d.parent().interval(), c);
            assert!(f <= fp, "{d}: {f} > {fp}");
        }
    }
}

#[test]
fn serialised_sections_round_trip() {
    let m = WeightedMeasure::new(0.3).unwrap();
    let v = Potential::piecewise(&m, &[(0.0, 2.0, 4.0), (2.0, 6.0, 0.5)]).unwrap();
    let s = build_section(&m, &v, &Interval::of(0.0, 6.0), LengthConvention::Nominal).unwrap();
    let back = ProperSection::parse(&s.to_text()).unwrap();
    assert_eq!(back.intervals, s.intervals);
    assert_eq!(back.window, s.window);
    assert_eq!(back.convention, s.convention);
}
