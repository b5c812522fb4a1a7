use super::{pow_diff, Interval, WeightedMeasure};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A constant value on an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub interval: Interval,
    pub value: f64,
}

/// `coeff · x^{-gamma}` on all of `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTail {
    pub coeff: f64,
    pub gamma: f64,
}

/// A nonnegative potential: a sum of constant pieces plus an optional power tail.
///
/// `power 1 0` is the constant potential `V ≡ 1`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pieces: Vec<Piece>,
    power: Option<PowerTail>,
}

impl Potential {
    pub fn new(m: &WeightedMeasure, pieces: Vec<Piece>, power: Option<PowerTail>) -> Result<Self> {
        for p in &pieces {
            if !(p.value.is_finite() && p.value >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "piece value",
                    value: p.value,
                    reason: "must be finite and nonnegative",
                });
            }
        }
        if let Some(PowerTail { coeff, gamma }) = power {
            if !(coeff.is_finite() && coeff >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "power coefficient",
                    value: coeff,
                    reason: "must be finite and nonnegative",
                });
            }
            if !gamma.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "power exponent",
                    value: gamma,
                    reason: "must be finite",
                });
            }
            if gamma >= 1.0 + m.alpha() {
                return Err(Error::NonLocallyIntegrable {
                    gamma,
                    alpha: m.alpha(),
                });
            }
        }
        let mut pieces = pieces;
        pieces.sort_by(|p, q| p.interval.lo().total_cmp(&q.interval.lo()));
        Ok(Self { pieces, power })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `V ≡ c`.
    pub fn constant(c: f64) -> Self {
        assert!(c.is_finite() && c >= 0.0);
        Self {
            pieces: Vec::new(),
            power: Some(PowerTail { coeff: c, gamma: 0.0 }),
        }
    }

    /// `V = coeff · x^{-gamma}`.
    pub fn power(m: &WeightedMeasure, coeff: f64, gamma: f64) -> Result<Self> {
        Self::new(m, Vec::new(), Some(PowerTail { coeff, gamma }))
    }

    /// Piecewise constant potential from `(a, b, value)` triples.
    pub fn piecewise(m: &WeightedMeasure, pieces: &[(f64, f64, f64)]) -> Result<Self> {
        let pieces = pieces
            .iter()
            .map(|&(a, b, value)| Ok(Piece { interval: Interval::new(a, b)?, value }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(m, pieces, None)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn power_tail(&self) -> Option<PowerTail> {
        self.power
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.value == 0.0)
            && self.power.is_none_or(|p| p.coeff == 0.0)
    }

    /// `Some(c)` when `V ≡ c`.
    pub fn as_constant(&self) -> Option<f64> {
        if self.pieces.iter().any(|p| p.value != 0.0) {
            return None;
        }
        match self.power {
            None => Some(0.0),
            Some(p) if p.gamma == 0.0 || p.coeff == 0.0 => Some(p.coeff),
            Some(_) => None,
        }
    }

    /// Bounded everywhere, i.e. no singular power tail.
    pub fn is_bounded(&self) -> bool {
        self.power.is_none_or(|p| p.coeff == 0.0 || p.gamma == 0.0)
    }

    /// Piece endpoints, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .pieces
            .iter()
            .flat_map(|p| [p.interval.lo(), p.interval.hi()])
            .filter(|&x| x > 0.0)
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// `V(x)`; pieces are taken half-open `[a, b)`.
    pub fn value(&self, x: f64) -> f64 {
        let mut v: f64 = self
            .pieces
            .iter()
            .filter(|p| p.interval.lo() <= x && x < p.interval.hi())
            .map(|p| p.value)
            .sum();
        if let Some(p) = self.power {
            v += p.coeff * x.powf(-p.gamma);
        }
        v
    }

    /// `∫_a^b V(y) y^e dy` in closed form. Infinite if the power tail makes it diverge.
    pub fn moment(&self, a: f64, b: f64, e: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut total = 0.0;
        for p in &self.pieces {
            let lo = a.max(p.interval.lo());
            let hi = b.min(p.interval.hi());
            if hi > lo && p.value != 0.0 {
                total += p.value * pow_diff(lo, hi, e + 1.0) / (e + 1.0);
            }
        }
        if let Some(PowerTail { coeff, gamma }) = self.power {
            if coeff != 0.0 {
                let q = e + 1.0 - gamma;
                total += if q > 0.0 {
                    coeff * pow_diff(a, b, q) / q
                } else if a > 0.0 {
                    if q == 0.0 {
                        coeff * (b / a).ln()
                    } else {
                        coeff * (a.powf(q) - b.powf(q)) / -q
                    }
                } else {
                    f64::INFINITY
                };
            }
        }
        total
    }

    /// Parse the line-oriented potential format.
    ///
    /// ```text
    /// # comment
    /// piece <a> <b> <value>
    /// power <coeff> <gamma>
    /// ```
    pub fn parse(text: &str, m: &WeightedMeasure) -> Result<Self> {
        let mut pieces = Vec::new();
        let mut power: Option<PowerTail> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let nums = |want: usize| -> Result<Vec<f64>> {
                if fields.len() != want + 1 {
                    return Err(Error::Parse {
                        line,
                        message: format!("`{}` takes {want} numbers", fields[0]),
                    });
                }
                fields[1..]
                    .iter()
                    .map(|s| {
                        s.parse::<f64>().map_err(|_| Error::Parse {
                            line,
                            message: format!("not a number: `{s}`"),
                        })
                    })
                    .collect()
            };
            let at_line = |e: Error| match e {
                Error::InvalidParameter { name, value, reason } => Error::Parse {
                    line,
                    message: format!("{name} = {value}: {reason}"),
                },
                other => other,
            };
            match fields[0] {
                "piece" => {
                    let v = nums(3)?;
                    let interval = Interval::new(v[0], v[1]).map_err(at_line)?;
                    pieces.push(Piece { interval, value: v[2] });
                }
                "power" => {
                    let v = nums(2)?;
                    if power.is_some() {
                        return Err(Error::Parse {
                            line,
                            message: "only one `power` directive is allowed".into(),
                        });
                    }
                    power = Some(PowerTail { coeff: v[0], gamma: v[1] });
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown directive `{other}`"),
                    })
                }
            }
        }
        Self::new(m, pieces, power).map_err(|e| match e {
            Error::InvalidParameter { name, value, reason } => Error::Parse {
                line: 0,
                message: format!("{name} = {value}: {reason}"),
            },
            other => other,
        })
    }

    /// Inverse of [`Potential::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.pieces {
            out.push_str(&format!("piece {} {} {}\n", p.interval.lo(), p.interval.hi(), p.value));
        }
        if let Some(p) = self.power {
            out.push_str(&format!("power {} {}\n", p.coeff, p.gamma));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m() -> WeightedMeasure {
        WeightedMeasure::new(0.5).unwrap()
    }

    #[test]
    fn closed_form_integrals() {
        let m = m();
        let one = Potential::constant(1.0);
        let i = Interval::of(0.3, 2.0);
        assert_relative_eq!(m.potential_integral(&one, &i), m.mu(&i), max_relative = 1e-15);
        assert_eq!(m.potential_integral(&Potential::zero(), &i), 0.0);
        let inv = Potential::power(&m, 1.0, 1.0).unwrap();
        assert_relative_eq!(m.potential_integral(&inv, &Interval::of(1.0, 4.0)), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn integrability_is_enforced() {
        let m = m();
        assert_eq!(
            Potential::power(&m, 1.0, 2.0),
            Err(Error::NonLocallyIntegrable { gamma: 2.0, alpha: 0.5 })
        );
        assert!(Potential::power(&m, 1.0, 1.49).is_ok());
        assert!(Potential::parse("power 1 2.0\n", &m).is_err());
    }

    #[test]
    fn parse_roundtrip() {
        let m = m();
        let text = "# two bumps\npiece 0 1 2.5\n\npiece 3 4 1  # right\npower 0.5 0.25\n";
        let v = Potential::parse(text, &m).unwrap();
        assert_eq!(v.pieces().len(), 2);
        assert_eq!(Potential::parse(&v.to_text(), &m).unwrap(), v);
        assert_relative_eq!(v.value(0.5), 2.5 + 0.5 * 0.5f64.powf(-0.25));
        assert_eq!(v.breakpoints(), vec![1.0, 3.0, 4.0]);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let m = m();
        match Potential::parse("piece 0 1 1\npeice 1 2 3\n", &m) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match Potential::parse("piece 2 1 1\n", &m) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constants_are_recognised() {
        let m = m();
        assert_eq!(Potential::constant(2.0).as_constant(), Some(2.0));
        assert_eq!(Potential::zero().as_constant(), Some(0.0));
        assert!(Potential::zero().is_zero());
        assert_eq!(Potential::piecewise(&m, &[(0.0, 1.0, 1.0)]).unwrap().as_constant(), None);
    }
}
