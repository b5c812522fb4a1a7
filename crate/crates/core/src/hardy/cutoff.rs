use super::atom::Host;
use crate::error::{Error, Result};
use crate::measure::Interval;
use crate::section::ProperSection;
use serde::Serialize;

/// `3u² - 2u³` on `[0, 1]`, clamped outside.
pub fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

fn smoothstep_slope(u: f64) -> f64 {
    if (0.0..=1.0).contains(&u) {
        6.0 * u * (1.0 - u)
    } else {
        0.0
    }
}

/// A cubic ramp rising from 0 at `lo` to 1 at `hi`, or falling if `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ramp {
    pub lo: f64,
    pub hi: f64,
}

impl Ramp {
    fn value(&self, x: f64) -> f64 {
        smoothstep((x - self.lo) / (self.hi - self.lo))
    }

    fn derivative(&self, x: f64) -> f64 {
        smoothstep_slope((x - self.lo) / (self.hi - self.lo)) / (self.hi - self.lo)
    }

    fn covers(&self, x: f64) -> bool {
        self.lo.min(self.hi) < x && x < self.lo.max(self.hi)
    }

    /// `sup |ramp'|`.
    fn max_slope(&self) -> f64 {
        1.5 / (self.hi - self.lo).abs()
    }
}

/// `ψ = 1` on `inner`, `0` off `outer`, smoothstep ramps in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cutoff {
    inner: Interval,
    outer: Interval,
}

impl Cutoff {
    pub fn new(inner: Interval, outer: Interval) -> Result<Self> {
        let ok_left = outer.lo() < inner.lo() || (outer.lo() == 0.0 && inner.lo() == 0.0);
        if !(ok_left && inner.hi() < outer.hi()) {
            return Err(Error::CutoffViolation {
                x: inner.lo(),
                reason: "inner interval must sit strictly inside the outer one",
            });
        }
        Ok(Self { inner, outer })
    }

    /// The cutoff between `I*` and `I**`.
    pub fn for_host(host: &Host) -> Result<Self> {
        Self::new(host.star(), host.double_star())
    }

    pub fn inner(&self) -> Interval {
        self.inner
    }

    pub fn outer(&self) -> Interval {
        self.outer
    }

    fn ramps(&self) -> [Option<Ramp>; 2] {
        [
            (self.inner.lo() > self.outer.lo()).then_some(Ramp {
                lo: self.outer.lo(),
                hi: self.inner.lo(),
            }),
            Some(Ramp {
                lo: self.outer.hi(),
                hi: self.inner.hi(),
            }),
        ]
    }

    pub fn value(&self, x: f64) -> f64 {
        if self.inner.contains(x) {
            return 1.0;
        }
        self.ramps()
            .iter()
            .flatten()
            .find(|r| r.covers(x))
            .map_or(0.0, |r| r.value(x))
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.ramps()
            .iter()
            .flatten()
            .find(|r| r.covers(x))
            .map_or(0.0, |r| r.derivative(x))
    }

    /// `sup |ψ'|`.
    pub fn max_slope(&self) -> f64 {
        self.ramps().iter().flatten().map(Ramp::max_slope).fold(0.0, f64::max)
    }
}

/// One member `φ_I` of a partition of unity subordinate to a section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionBump {
    pub host: Interval,
    pub left: Option<Ramp>,
    pub right: Option<Ramp>,
}

impl PartitionBump {
    pub fn value(&self, x: f64) -> f64 {
        for r in self.left.iter().chain(&self.right) {
            if r.covers(x) {
                return r.value(x);
            }
        }
        let lo = self.left.map_or(self.host.lo(), |r| r.hi.max(r.lo));
        let hi = self.right.map_or(self.host.hi(), |r| r.hi.min(r.lo));
        if lo <= x && x <= hi {
            1.0
        } else {
            0.0
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.left
            .iter()
            .chain(&self.right)
            .find(|r| r.covers(x))
            .map_or(0.0, |r| r.derivative(x))
    }

    /// Smallest interval outside which the bump vanishes.
    pub fn support(&self) -> Interval {
        let lo = self.left.map_or(self.host.lo(), |r| r.lo.min(r.hi));
        let hi = self.right.map_or(self.host.hi(), |r| r.lo.max(r.hi));
        Interval::of(lo, hi)
    }

    /// `sup |φ'| · |I|`.
    pub fn slope_constant(&self) -> f64 {
        self.left
            .iter()
            .chain(&self.right)
            .map(Ramp::max_slope)
            .fold(0.0, f64::max)
            * self.host.len()
    }
}

/// Bumps with `supp φ_I ⊂ I*` summing to 1 on the section's window.
///
/// Across a shared endpoint `m` of neighbours `I | J` the transition occupies
/// `I* ∩ J* = [m - (β-1)|J|/2, m + (β-1)|I|/2]`; at the window ends each bump ramps down
/// inside its own `I*`. Ramps of width `w` have slope up to `1.5/w`, so `sup|φ_I'| |I|`
/// is at most `3/(β-1)`.
pub fn partition_of_unity(section: &ProperSection) -> Vec<PartitionBump> {
    let half = 0.5 * (section.beta - 1.0);
    let hosts: Vec<Interval> = section.intervals.iter().map(|d| d.interval()).collect();
    let n = hosts.len();
    let mut bumps: Vec<PartitionBump> = hosts
        .iter()
        .map(|&host| PartitionBump {
            host,
            left: None,
            right: None,
        })
        .collect();
    for k in 0..n {
        let i = hosts[k];
        if k + 1 < n && hosts[k + 1].lo() == i.hi() {
            let j = hosts[k + 1];
            let (lo, hi) = (i.hi() - half * j.len(), i.hi() + half * i.len());
            bumps[k].right = Some(Ramp { lo: hi, hi: lo });
            bumps[k + 1].left = Some(Ramp { lo, hi });
        } else {
            bumps[k].right = Some(Ramp {
                lo: i.hi() + half * i.len(),
                hi: i.hi(),
            });
        }
        if (k == 0 || hosts[k - 1].hi() != i.lo()) && i.lo() > 0.0 {
            bumps[k].left = Some(Ramp {
                lo: i.lo() - half * i.len(),
                hi: i.lo(),
            });
        }
    }
    bumps
}
