use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::measure::{enlarge, Interval};
use serde::{Deserialize, Serialize};
use std::ops::Range;
use std::sync::Arc;

/// `|∫ a dμ| ≤ CANCELLATION · ‖a‖_{L¹(μ)}` for cancellative atoms.
pub const CANCELLATION: f64 = 1e-10;
const SIZE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomKind {
    /// Supported in `I**`, bounded by `μ(supp)^{-1}`, mean zero.
    Cancellative,
    /// `μ(I)^{-1} 1_I`.
    Local,
    /// Any interval, bounded by `μ(supp)^{-1}`, mean zero.
    Mu,
}

/// The section interval an atom is attached to, with the enlargement factor `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Host {
    pub interval: Interval,
    pub beta: f64,
}

impl Host {
    /// `I** = β² I`.
    pub fn double_star(&self) -> Interval {
        enlarge(&self.interval, self.beta * self.beta).support
    }

    /// `I* = β I`.
    pub fn star(&self) -> Interval {
        enlarge(&self.interval, self.beta).support
    }
}

/// A normalised building block on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    kind: AtomKind,
    cells: Range<usize>,
    host: Option<Host>,
    values: GridFunction,
}

fn snapped(grid: &Grid, interval: &Interval) -> Result<Range<usize>> {
    let cells = grid.snap(interval);
    if cells.is_empty() {
        return Err(Error::InvalidParameter {
            name: "support",
            value: interval.len(),
            reason: "interval contains no grid node",
        });
    }
    Ok(cells)
}

fn mean_free(grid: &Arc<Grid>, cells: Range<usize>, profile: &dyn Fn(f64) -> f64) -> Result<GridFunction> {
    let w = &grid.weights()[cells.clone()];
    let x = &grid.nodes()[cells.clone()];
    let raw: Vec<f64> = x.iter().map(|&x| profile(x)).collect();
    let mass: f64 = w.iter().sum();
    let mean = raw.iter().zip(w).map(|(p, w)| p * w).sum::<f64>() / mass;
    let centred: Vec<f64> = raw.iter().map(|p| p - mean).collect();
    let sup = centred.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // what survives centring a constant is rounding, which has no usable mean
    if !(sup > 1e-12 * scale) || !sup.is_finite() {
        return Err(Error::InvalidParameter {
            name: "profile",
            value: sup,
            reason: "profile is constant on the support",
        });
    }
    let mut values = vec![0.0; grid.len()];
    for (v, c) in values[cells].iter_mut().zip(&centred) {
        *v = c / (sup * mass);
    }
    Ok(GridFunction::new(grid.clone(), values))
}

impl Atom {
    /// `μ(I)^{-1} 1_I` on the cells whose node lies in `I`.
    pub fn local(grid: &Arc<Grid>, host: Host) -> Result<Self> {
        let cells = snapped(grid, &host.interval)?;
        Ok(Self {
            kind: AtomKind::Local,
            values: GridFunction::normalized_indicator(grid.clone(), cells.clone()),
            cells,
            host: Some(host),
        })
    }

    /// A mean-zero atom on `support`: `profile` is sampled, mean-corrected against `μ`
    /// and scaled so that `‖a‖_∞ = μ(support)^{-1}`.
    pub fn mu(grid: &Arc<Grid>, support: &Interval, profile: &dyn Fn(f64) -> f64) -> Result<Self> {
        let cells = snapped(grid, support)?;
        Ok(Self {
            kind: AtomKind::Mu,
            values: mean_free(grid, cells.clone(), profile)?,
            cells,
            host: None,
        })
    }

    /// As [`Atom::mu`], with the support required to lie in `I**`.
    pub fn cancellative(grid: &Arc<Grid>, host: Host, support: &Interval, profile: &dyn Fn(f64) -> f64) -> Result<Self> {
        let outer = host.double_star();
        if !support.is_subset_of(&outer) {
            return Err(Error::SupportViolation {
                lo: support.lo(),
                hi: support.hi(),
                host_lo: outer.lo(),
                host_hi: outer.hi(),
            });
        }
        let cells = snapped(grid, support)?;
        Ok(Self {
            kind: AtomKind::Cancellative,
            values: mean_free(grid, cells.clone(), profile)?,
            cells,
            host: Some(host),
        })
    }

    /// Normalise a function known to be mean-zero and supported on `cells`: returns
    /// `(‖b‖_∞ μ(cells), b / that)`.
    pub(crate) fn from_parts(kind: AtomKind, cells: Range<usize>, host: Option<Host>, b: GridFunction) -> Result<(f64, Self)> {
        let mass: f64 = b.grid().weights()[cells.clone()].iter().sum();
        let lambda = b.sup_norm() * mass;
        if lambda == 0.0 {
            return Err(Error::InvalidParameter {
                name: "atom",
                value: 0.0,
                reason: "zero function",
            });
        }
        let atom = Self {
            kind,
            cells,
            host,
            values: b.scaled(1.0 / lambda),
        };
        Ok((lambda, atom))
    }

    pub(crate) fn from_raw(kind: AtomKind, cells: Range<usize>, host: Option<Host>, values: GridFunction) -> Self {
        Self {
            kind,
            cells,
            host,
            values,
        }
    }

    pub fn kind(&self) -> AtomKind {
        self.kind
    }

    pub fn host(&self) -> Option<Host> {
        self.host
    }

    pub fn cells(&self) -> Range<usize> {
        self.cells.clone()
    }

    /// Union of the atom's cells.
    pub fn support(&self) -> Interval {
        self.values.grid().span(&self.cells).expect("atoms have nonempty support")
    }

    pub fn values(&self) -> &GridFunction {
        &self.values
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.values.grid()
    }

    /// `μ` of the support, as the sum of cell masses.
    pub fn support_mass(&self) -> f64 {
        self.grid().weights()[self.cells.clone()].iter().sum()
    }

    /// Check the size, support and cancellation conditions of the atom's kind.
    pub fn validate(&self) -> Result<()> {
        let v = self.values.values();
        if v[..self.cells.start].iter().chain(&v[self.cells.end..]).any(|&x| x != 0.0) {
            return Err(Error::InvalidParameter {
                name: "atom",
                value: f64::NAN,
                reason: "nonzero outside the declared support",
            });
        }
        let mass = self.support_mass();
        match self.kind {
            AtomKind::Local => {
                let level = 1.0 / mass;
                if v[self.cells.clone()].iter().any(|&x| (x - level).abs() > SIZE_SLACK * level) {
                    return Err(Error::InvalidParameter {
                        name: "atom",
                        value: self.values.sup_norm(),
                        reason: "local atom is not a normalised indicator",
                    });
                }
                if let Some(h) = self.host {
                    let span = self.support();
                    let expect = self.grid().span(&self.grid().snap(&h.interval));
                    if expect != Some(span) {
                        return Err(Error::InvalidParameter {
                            name: "atom",
                            value: span.len(),
                            reason: "local atom support differs from its host",
                        });
                    }
                }
            }
            AtomKind::Cancellative | AtomKind::Mu => {
                let sup = self.values.sup_norm();
                if sup > (1.0 + SIZE_SLACK) / mass {
                    return Err(Error::InvalidParameter {
                        name: "atom",
                        value: sup * mass,
                        reason: "size condition ‖a‖∞ ≤ μ(supp)^-1 fails",
                    });
                }
                let l1 = self.values.l1_norm();
                if self.values.integral().abs() > CANCELLATION * l1 {
                    return Err(Error::InvalidParameter {
                        name: "atom",
                        value: self.values.integral(),
                        reason: "cancellation fails",
                    });
                }
                if self.kind == AtomKind::Cancellative {
                    let h = self.host.ok_or(Error::InvalidParameter {
                        name: "atom",
                        value: f64::NAN,
                        reason: "cancellative atom without host",
                    })?;
                    let outer = h.double_star();
                    let s = self.support();
                    let nodes = &self.grid().nodes()[self.cells.clone()];
                    if nodes.iter().any(|&x| !outer.contains(x)) {
                        return Err(Error::SupportViolation {
                            lo: s.lo(),
                            hi: s.hi(),
                            host_lo: outer.lo(),
                            host_hi: outer.hi(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Coefficients paired with atoms on a common grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AtomicCombination {
    pub terms: Vec<(f64, Atom)>,
}

impl AtomicCombination {
    pub fn new(terms: Vec<(f64, Atom)>) -> Self {
        Self { terms }
    }

    /// `Σ |λ_n|`.
    pub fn certificate(&self) -> f64 {
        self.terms.iter().map(|(l, _)| l.abs()).sum()
    }
}

/// `Σ λ_n a_n` and the certificate `Σ |λ_n|`, an upper bound for the atomic norm.
pub fn atomic_synthesize(combo: &AtomicCombination) -> Result<(GridFunction, f64)> {
    let Some((_, first)) = combo.terms.first() else {
        return Err(Error::InvalidParameter {
            name: "combination",
            value: 0.0,
            reason: "empty combination",
        });
    };
    let mut f = GridFunction::zeros(first.grid().clone());
    for (lambda, atom) in &combo.terms {
        f = f.axpy(*lambda, atom.values())?;
    }
    Ok((f, combo.certificate()))
}
