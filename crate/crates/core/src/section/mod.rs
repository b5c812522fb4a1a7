//! Dyadic intervals and the stopping-time section `ℐ(V)`: the maximal dyadic intervals
//! with `|2I|²/μ(2I) ∫_{2I} V dμ ≤ 1`.

mod validate;

pub use validate::{
    stopping_rule_violations, validate_family, validate_section, SectionValidationReport,
    StoppingWitness,
};

use crate::error::{check_positive, Error, Result};
use crate::measure::{enlarge, Interval, LengthConvention, Potential, WeightedMeasure};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Largest scale tried when looking for an ancestor with `F > 1`.
pub const MAX_SCALE: i32 = 64;
/// Smallest scale the descent will visit.
pub const MIN_SCALE: i32 = -48;
/// Default enlargement factor `β`.
pub const DEFAULT_BETA: f64 = 1.05;

/// `[k 2^n, (k+1) 2^n]` with `k ≥ 1`, or `(0, 2^n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DyadicInterval {
    Left { n: i32 },
    Standard { k: u64, n: i32 },
}

impl DyadicInterval {
    pub fn left(n: i32) -> Self {
        Self::Left { n }
    }

    pub fn standard(k: u64, n: i32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter {
                name: "k",
                value: 0.0,
                reason: "standard dyadic intervals need k >= 1",
            });
        }
        Ok(Self::Standard { k, n })
    }

    pub fn scale(&self) -> i32 {
        match *self {
            Self::Left { n } | Self::Standard { n, .. } => n,
        }
    }

    pub fn is_left(&self) -> bool {
        matches!(self, Self::Left { .. })
    }

    pub fn interval(&self) -> Interval {
        match *self {
            Self::Left { n } => Interval::of(0.0, exp2(n)),
            Self::Standard { k, n } => {
                let h = exp2(n);
                Interval::of(k as f64 * h, (k + 1) as f64 * h)
            }
        }
    }

    pub fn len(&self) -> f64 {
        exp2(self.scale())
    }

    /// `I^d`, the smallest dyadic interval properly containing `I`.
    pub fn parent(&self) -> Self {
        match *self {
            Self::Left { n } => Self::Left { n: n + 1 },
            Self::Standard { k, n } if k / 2 == 0 => Self::Left { n: n + 1 },
            Self::Standard { k, n } => Self::Standard { k: k / 2, n: n + 1 },
        }
    }

    pub fn children(&self) -> [Self; 2] {
        match *self {
            Self::Left { n } => [Self::Left { n: n - 1 }, Self::Standard { k: 1, n: n - 1 }],
            Self::Standard { k, n } => [
                Self::Standard { k: 2 * k, n: n - 1 },
                Self::Standard { k: 2 * k + 1, n: n - 1 },
            ],
        }
    }

    /// The smallest left interval containing `[0, x]`.
    pub fn left_cover(x: f64) -> Self {
        let mut n = x.log2().ceil() as i32;
        while exp2(n) < x {
            n += 1;
        }
        Self::Left { n }
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Left { n } => write!(f, "left {n}"),
            Self::Standard { k, n } => write!(f, "std {k} {n}"),
        }
    }
}

fn exp2(n: i32) -> f64 {
    2f64.powi(n)
}

/// `F(I) = |2I|²/μ(2I) · ∫_{2I} V dμ`.
pub fn s_functional(
    m: &WeightedMeasure,
    v: &Potential,
    interval: &Interval,
    convention: LengthConvention,
) -> f64 {
    let doubled = enlarge(interval, 2.0);
    let len = doubled.len(convention);
    let mu = m.mu(&doubled.support);
    len * len * (m.potential_integral(v, &doubled.support) / mu)
}

/// A validated family of dyadic intervals covering a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProperSection {
    pub alpha: f64,
    pub convention: LengthConvention,
    pub window: Interval,
    pub beta: f64,
    /// Largest length ratio observed between touching intervals.
    pub c0: f64,
    pub intervals: Vec<DyadicInterval>,
}

impl ProperSection {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DyadicInterval> {
        self.intervals.iter()
    }

    /// `min(2^{1/3}, (1 + 1/C0)^{1/3})`; admissible `β` lie strictly below it.
    pub fn beta_bound(&self) -> f64 {
        2f64.cbrt().min((1.0 + 1.0 / self.c0).cbrt())
    }

    /// The section member containing `x`, preferring the left one at shared endpoints.
    pub fn locate(&self, x: f64) -> Option<&DyadicInterval> {
        self.intervals.iter().find(|d| d.interval().contains(x))
    }

    /// Text form: a header of `# key value` lines, then one interval per line.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# alpha {}\n# beta {}\n# window {} {}\n# convention {}\n",
            self.alpha,
            self.beta,
            self.window.lo(),
            self.window.hi(),
            match self.convention {
                LengthConvention::Nominal => "nominal",
                LengthConvention::Truncated => "truncated",
            }
        );
        for d in &self.intervals {
            s.push_str(&format!("{d}\n"));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut alpha = None;
        let mut beta = DEFAULT_BETA;
        let mut window = None;
        let mut convention = LengthConvention::default();
        let mut intervals = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let bad = |message: &str| Error::Parse {
                line,
                message: message.to_string(),
            };
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("bad number `{s}`")));
            let fields: Vec<&str> = raw.trim().trim_start_matches('#').split_whitespace().collect();
            match (raw.trim_start().starts_with('#'), fields.as_slice()) {
                (_, []) => {}
                (true, ["alpha", a]) => alpha = Some(num(a)?),
                (true, ["beta", b]) => beta = num(b)?,
                (true, ["window", a, b]) => {
                    window = Some(Interval::new(num(a)?, num(b)?).map_err(|_| bad("bad window"))?)
                }
                (true, ["convention", "nominal"]) => convention = LengthConvention::Nominal,
                (true, ["convention", "truncated"]) => convention = LengthConvention::Truncated,
                (true, _) => {}
                (false, ["left", n]) => {
                    intervals.push(DyadicInterval::left(n.parse().map_err(|_| bad("bad scale"))?))
                }
                (false, ["std", k, n]) => intervals.push(
                    DyadicInterval::standard(
                        k.parse().map_err(|_| bad("bad index"))?,
                        n.parse().map_err(|_| bad("bad scale"))?,
                    )
                    .map_err(|_| bad("standard intervals need k >= 1"))?,
                ),
                (false, _) => return Err(bad("expected `left <n>` or `std <k> <n>`")),
            }
        }
        let alpha = alpha.ok_or(Error::Parse {
            line: 0,
            message: "missing `# alpha` header".into(),
        })?;
        let window = window.ok_or(Error::Parse {
            line: 0,
            message: "missing `# window` header".into(),
        })?;
        let c0 = neighbor_c0(&intervals);
        Ok(Self {
            alpha,
            convention,
            window,
            beta,
            c0,
            intervals,
        })
    }
}

fn neighbor_c0(intervals: &[DyadicInterval]) -> f64 {
    intervals
        .windows(2)
        .filter(|w| w[0].interval().hi() == w[1].interval().lo())
        .map(|w| {
            let (a, b) = (w[0].len(), w[1].len());
            a.max(b) / a.min(b)
        })
        .fold(1.0, f64::max)
}

/// The members of `ℐ(V)` whose interior meets `window`, in increasing order.
pub fn build_section(
    m: &WeightedMeasure,
    v: &Potential,
    window: &Interval,
    convention: LengthConvention,
) -> Result<ProperSection> {
    check_positive("window length", window.len())?;
    let f = |d: &DyadicInterval| s_functional(m, v, &d.interval(), convention);
    let mut top = DyadicInterval::left_cover(window.hi());
    loop {
        let value = f(&top);
        if value.is_infinite() || value.is_nan() {
            return Err(Error::NonLocallyIntegrable {
                gamma: v.power_tail().map_or(f64::NAN, |p| p.gamma),
                alpha: m.alpha(),
            });
        }
        if value > 1.0 {
            break;
        }
        if top.scale() >= MAX_SCALE {
            return Err(Error::DegeneratePotential { max_scale: MAX_SCALE });
        }
        top = top.parent();
    }
    let meets = |d: &DyadicInterval| {
        let i = d.interval();
        i.lo() < window.hi() && window.lo() < i.hi()
    };
    let mut intervals = Vec::new();
    let mut stack = vec![top];
    while let Some(d) = stack.pop() {
        // children pushed in reverse so they pop left to right
        for c in d.children().into_iter().rev() {
            if !meets(&c) {
                continue;
            }
            let value = f(&c);
            if value.is_nan() {
                return Err(Error::NonLocallyIntegrable {
                    gamma: v.power_tail().map_or(f64::NAN, |p| p.gamma),
                    alpha: m.alpha(),
                });
            }
            if value <= 1.0 {
                intervals.push(c);
            } else if c.scale() <= MIN_SCALE {
                return Err(Error::Unresolved {
                    min_scale: MIN_SCALE,
                    x: c.interval().center(),
                });
            } else {
                stack.push(c);
            }
        }
    }
    intervals.sort_by(|a, b| a.interval().lo().total_cmp(&b.interval().lo()));
    let c0 = neighbor_c0(&intervals);
    Ok(ProperSection {
        alpha: m.alpha(),
        convention,
        window: *window,
        beta: DEFAULT_BETA,
        c0,
        intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parents() {
        assert_eq!(DyadicInterval::standard(1, -1).unwrap().parent(), DyadicInterval::left(0));
        assert_eq!(DyadicInterval::standard(1, 0).unwrap().parent(), DyadicInterval::left(1));
        assert_eq!(DyadicInterval::left(0).parent(), DyadicInterval::left(1));
        assert_eq!(DyadicInterval::standard(5, 0).unwrap().parent(), DyadicInterval::standard(2, 1).unwrap());
        for d in [DyadicInterval::left(3), DyadicInterval::standard(7, -2).unwrap()] {
            for c in d.children() {
                assert_eq!(c.parent(), d);
            }
        }
        assert!(DyadicInterval::standard(0, 1).is_err());
    }

    #[test]
    fn functional_for_constants() {
        let m = WeightedMeasure::new(0.5).unwrap();
        let i = DyadicInterval::standard(1, 0).unwrap().interval();
        for conv in [LengthConvention::Nominal, LengthConvention::Truncated] {
            assert_eq!(s_functional(&m, &Potential::constant(1.0), &i, conv), 4.0);
            assert_eq!(s_functional(&m, &Potential::zero(), &i, conv), 0.0);
        }
    }

    #[test]
    fn zero_potential_is_degenerate() {
        let m = WeightedMeasure::new(0.5).unwrap();
        let e = build_section(&m, &Potential::zero(), &Interval::of(0.0, 4.0), LengthConvention::default());
        assert!(matches!(e, Err(Error::DegeneratePotential { .. })));
    }

    #[test]
    fn text_round_trip() {
        let m = WeightedMeasure::new(0.5).unwrap();
        let s = build_section(&m, &Potential::constant(1.0), &Interval::of(0.0, 4.0), LengthConvention::Nominal).unwrap();
        assert_eq!(ProperSection::parse(&s.to_text()).unwrap(), s);
    }
}
