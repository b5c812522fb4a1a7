use super::{s_functional, DyadicInterval, ProperSection};
use crate::measure::{Interval, Potential, WeightedMeasure};
use serde::Serialize;

const SLACK: f64 = 1e-12;

/// Outcome of checking the proper-section axioms on a family of intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionValidationReport {
    /// Interiors pairwise disjoint.
    pub disjoint: bool,
    pub overlap: Option<(Interval, Interval)>,
    /// Union covers the window.
    pub covers: bool,
    pub gaps: Vec<Interval>,
    /// Largest length ratio between touching intervals.
    pub c0: f64,
    pub worst_pair: Option<(Interval, Interval)>,
    pub beta: f64,
    pub beta_bound: f64,
    pub beta_ok: bool,
}

impl SectionValidationReport {
    pub fn passed(&self) -> bool {
        self.disjoint && self.covers && self.c0.is_finite() && self.beta_ok
    }
}

/// Check axioms (a)–(c) for an arbitrary family against `window`, and the admissibility
/// of `beta` given the observed neighbour constant.
pub fn validate_family(family: &[Interval], window: &Interval, beta: f64) -> SectionValidationReport {
    let mut sorted = family.to_vec();
    sorted.sort_by(|a, b| a.lo().total_cmp(&b.lo()).then(a.hi().total_cmp(&b.hi())));
    let tol = SLACK * window.hi().max(1.0);

    let mut overlap = None;
    let mut gaps = Vec::new();
    let mut c0 = 1.0f64;
    let mut worst_pair = None;
    let mut reach = window.lo();
    let mut last: Option<Interval> = None;
    for cur in &sorted {
        if let Some(prev) = last {
            if overlap.is_none() && cur.lo() < prev.hi() - tol {
                overlap = Some((prev, *cur));
            }
            if (cur.lo() - prev.hi()).abs() <= tol {
                let ratio = cur.len().max(prev.len()) / cur.len().min(prev.len());
                if ratio > c0 {
                    c0 = ratio;
                    worst_pair = Some((prev, *cur));
                }
            }
        }
        if cur.lo() > reach + tol && reach < window.hi() {
            gaps.push(Interval::of(reach, cur.lo().min(window.hi())));
        }
        reach = reach.max(cur.hi());
        last = Some(*cur);
    }
    if reach < window.hi() - tol {
        gaps.push(Interval::of(reach, window.hi()));
    }
    let beta_bound = 2f64.cbrt().min((1.0 + 1.0 / c0).cbrt());
    SectionValidationReport {
        disjoint: overlap.is_none(),
        overlap,
        covers: gaps.is_empty(),
        gaps,
        c0,
        worst_pair,
        beta,
        beta_bound,
        beta_ok: beta > 1.0 && beta < beta_bound,
    }
}

pub fn validate_section(s: &ProperSection) -> SectionValidationReport {
    let family: Vec<Interval> = s.intervals.iter().map(DyadicInterval::interval).collect();
    validate_family(&family, &s.window, s.beta)
}

/// A section member breaking `F(I) ≤ 1 < F(I^d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StoppingWitness {
    pub interval: DyadicInterval,
    pub f: f64,
    pub f_parent: f64,
}

/// Re-evaluate the stopping rule on every member.
pub fn stopping_rule_violations(m: &WeightedMeasure, v: &Potential, s: &ProperSection) -> Vec<StoppingWitness> {
    s.intervals
        .iter()
        .filter_map(|d| {
            let f = s_functional(m, v, &d.interval(), s.convention);
            let f_parent = s_functional(m, v, &d.parent().interval(), s.convention);
            (!(f <= 1.0 && f_parent > 1.0)).then_some(StoppingWitness {
                interval: *d,
                f,
                f_parent,
            })
        })
        .collect()
}
