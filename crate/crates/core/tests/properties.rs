mod common;

use bessel_hardy::grid::{Grid, GridSpec};
use bessel_hardy::hardy::{partition_of_unity, Atom, Host};
use bessel_hardy::kernel::KernelEval;
use bessel_hardy::measure::{Interval, LengthConvention, WeightedMeasure};
use bessel_hardy::section::{build_section, s_functional, DyadicInterval, DEFAULT_BETA};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn alpha() -> impl Strategy<Value = f64> {
    0.01f64..0.99
}

/// Sorted points spread over several decades.
fn sorted_points<const N: usize>() -> impl Strategy<Value = [f64; N]> {
    prop::array::uniform::<_, N>(-3.0f64..3.0).prop_map(|e| {
        let mut p = e.map(|x| 10f64.powf(x));
        p.sort_by(f64::total_cmp);
        p
    })
}

proptest! {
    #[test]
    fn mass_is_additive(alpha in alpha(), p in sorted_points::<3>()) {
        let m = WeightedMeasure::new(alpha).unwrap();
        let (ab, bc, ac) = (m.mass(p[0], p[1]), m.mass(p[1], p[2]), m.mass(p[0], p[2]));
        prop_assert!((ab + bc - ac).abs() <= 1e-13 * ac, "{ab} + {bc} vs {ac}");
    }

    #[test]
    fn nested_intervals_have_larger_ratio(alpha in alpha(), p in sorted_points::<4>()) {
        let m = WeightedMeasure::new(alpha).unwrap();
        prop_assume!(p[1] < p[2]);
        let inner = m.ratio_sq_over_mu(&Interval::of(p[1], p[2])).ratio;
        let outer = m.ratio_sq_over_mu(&Interval::of(p[0], p[3])).ratio;
        prop_assert!(inner <= outer * (1.0 + 1e-12));
        prop_assert!(m.gamma(p[1], p[2]) <= m.gamma(p[0], p[3]) * (1.0 + 1e-12));
    }

    #[test]
    fn mass_has_two_regimes(alpha in alpha(), p in sorted_points::<2>()) {
        let (a, b) = (p[0], p[1]);
        prop_assume!(a < b);
        let m = WeightedMeasure::new(alpha).unwrap();
        let q = 1.0 + alpha;
        let mu = m.mass(a, b);
        let slack = 1e-12;
        if 2.0 * a <= b {
            let r = mu / b.powf(q);
            prop_assert!(r >= (1.0 - 0.5f64.powf(q)) / q * (1.0 - slack) && r <= (1.0 + slack) / q, "{r}");
        } else {
            let r = mu / ((b - a) * a.powf(alpha));
            prop_assert!(r >= 1.0 - slack && r <= 2f64.powf(alpha) * (1.0 + slack), "{r}");
        }
    }

    #[test]
    fn doubling_is_at_most_the_origin_ratio(alpha in 0.01f64..3.0, x in 0.0f64..100.0, r in 1e-4f64..100.0) {
        let m = WeightedMeasure::new(alpha).unwrap();
        prop_assert!(m.doubling_ratio(x, r) <= 2f64.powf(1.0 + alpha) * (1.0 + 1e-12));
    }

    #[test]
    fn kernel_is_symmetric_and_positive(alpha in 0.01f64..3.0, x in 0.0f64..20.0, y in 0.0f64..20.0, t in 1e-2f64..10.0) {
        let k = KernelEval::new(&WeightedMeasure::new(alpha).unwrap(), t).unwrap();
        prop_assume!((x - y).abs() < 10.0 * t.sqrt());
        let (xy, yx) = (k.value(x, y), k.value(y, x));
        prop_assert!(xy > 0.0);
        prop_assert!((xy - yx).abs() <= 1e-12 * xy);
    }

    #[test]
    fn functional_does_not_decrease_toward_the_parent(seed in any::<u64>(), k in 1u64..64, n in -4i32..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = WeightedMeasure::new(0.5).unwrap();
        let v = common::random_potential(&m, &mut rng);
        let d = if k % 8 == 0 { DyadicInterval::left(n) } else { DyadicInterval::standard(k, n).unwrap() };
        for c in [LengthConvention::Nominal, LengthConvention::Truncated] {
            let (here, up) = (s_functional(&m, &v, &d.interval(), c), s_functional(&m, &v, &d.parent().interval(), c));
            prop_assert!(here <= up * (1.0 + 1e-12) + 1e-300, "{d}: {here} > {up}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_atoms_meet_their_conditions(
        k in 1u32..12,
        lo in 0.0f64..1.0,
        width in 0.05f64..1.0,
        freq in 0.1f64..10.0,
        phase in 0.0f64..6.3,
    ) {
        let m = WeightedMeasure::new(0.5).unwrap();
        let g = Grid::build(&m, GridSpec::new(300, 12.0, 1.05).unwrap(), &[]).unwrap();
        let host = Host { interval: Interval::of(0.5 * k as f64, 0.5 * k as f64 + 0.5), beta: DEFAULT_BETA };
        let profile = move |x: f64| (freq * x + phase).cos();
        let outer = host.double_star();
        let inside = Interval::of(outer.lo() + lo * outer.len() * 0.5, (outer.lo() + (lo * 0.5 + width * 0.5) * outer.len()).min(outer.hi()));
        prop_assert!(Atom::local(&g, host).unwrap().validate().is_ok());
        // a support holding a single node cannot carry a mean-zero profile and is refused
        for built in [
            Atom::mu(&g, &Interval::of(lo, lo + 5.0 * width), &profile),
            Atom::cancellative(&g, host, &inside, &profile),
        ] {
            match built {
                Ok(atom) => prop_assert!(atom.validate().is_ok(), "{:?}: {:?}", atom.kind(), atom.validate()),
                Err(e) => prop_assert!(g.snap(&inside).len() <= 1 || e.to_string().contains("constant"), "{e}"),
            }
        }
    }

    #[test]
    fn partitions_of_unity_sum_to_one(seed in any::<u64>(), alpha in 0.1f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = WeightedMeasure::new(alpha).unwrap();
        let v = common::random_potential(&m, &mut rng);
        let s = build_section(&m, &v, &Interval::of(0.0, 8.0), LengthConvention::default()).unwrap();
        let bumps = partition_of_unity(&s);
        for i in 1..800 {
            let x = 8.0 * i as f64 / 800.0;
            let total: f64 = bumps.iter().map(|b| b.value(x)).sum();
            prop_assert!((total - 1.0).abs() < 1e-12, "x={x}: {total}");
        }
    }
}
