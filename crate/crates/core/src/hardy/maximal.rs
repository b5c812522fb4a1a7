use crate::error::{check_positive, Error, Result};
use crate::grid::GridFunction;
use crate::kernel::heat_apply;
use crate::measure::Potential;
use crate::semigroup::{Propagator, SplittingScheme};
use rayon::prelude::*;
use serde::Serialize;

/// Default number of sample times per doubling of `t`.
pub const PER_OCTAVE: usize = 16;
/// `t_min = LOCAL_T_MIN · τ²` for the local norm.
pub const LOCAL_T_MIN: f64 = 1.0 / 256.0;

/// A finite increasing set of times standing in for `t > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    /// `per_octave` geometrically spaced times per doubling, endpoints included.
    pub fn log_spaced(t_min: f64, t_max: f64, per_octave: usize) -> Result<Self> {
        Self::check(t_min, t_max, per_octave)?;
        let n = ((t_max / t_min).log2() * per_octave as f64).ceil().max(1.0) as usize;
        let ratio = (t_max / t_min).ln() / n as f64;
        let mut times: Vec<f64> = (0..=n).map(|k| t_min * (ratio * k as f64).exp()).collect();
        times[n] = t_max;
        Ok(Self { times })
    }

    /// `per_octave` equally spaced times inside each octave `[2^k t_min, 2^{k+1} t_min]`,
    /// so that every octave is stepped with one step length.
    pub fn octave_uniform(t_min: f64, t_max: f64, per_octave: usize) -> Result<Self> {
        Self::check(t_min, t_max, per_octave)?;
        let mut times = vec![t_min];
        let mut start = t_min;
        while start < t_max {
            let h = start / per_octave as f64;
            for j in 1..=per_octave {
                let t = start + j as f64 * h;
                if t >= t_max * (1.0 - 1e-12) {
                    break;
                }
                times.push(t);
            }
            start *= 2.0;
        }
        times.push(t_max);
        Ok(Self { times })
    }

    pub fn from_times(mut times: Vec<f64>) -> Result<Self> {
        times.sort_by(f64::total_cmp);
        times.dedup();
        match times.first() {
            Some(&t) if t > 0.0 && times.iter().all(|t| t.is_finite()) => Ok(Self { times }),
            _ => Err(Error::InvalidParameter {
                name: "times",
                value: times.first().copied().unwrap_or(f64::NAN),
                reason: "need at least one finite positive time",
            }),
        }
    }

    fn check(t_min: f64, t_max: f64, per_octave: usize) -> Result<()> {
        check_positive("t_min", t_min)?;
        check_positive("t_max", t_max)?;
        if t_max <= t_min || per_octave == 0 {
            return Err(Error::InvalidParameter {
                name: "t_max",
                value: t_max,
                reason: "need t_min < t_max and at least one time per octave",
            });
        }
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `|K_t f|` at each time of the grid, passed to `visit` in increasing order of time.
fn for_each_slice(
    v: &Potential,
    f: &GridFunction,
    times: &TimeGrid,
    scheme: &SplittingScheme,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<()> {
    match v.as_constant() {
        Some(c) => {
            let slices: Vec<Vec<f64>> = times
                .times()
                .par_iter()
                .map(|&t| {
                    let d = (-c * t).exp();
                    heat_apply(t, f).map(|g| g.values().iter().map(|x| (d * x).abs()).collect())
                })
                .collect::<Result<_>>()?;
            for (k, s) in slices.iter().enumerate() {
                visit(k, s);
            }
            Ok(())
        }
        None => {
            let p = Propagator::new(f.grid().clone(), v)?;
            p.evolve_through(f, times.times(), scheme, |k, s| {
                let abs: Vec<f64> = s.iter().map(|x| x.abs()).collect();
                visit(k, &abs)
            })
        }
    }
}

/// `max_k |K_{t_k} f|` node-wise.
pub fn maximal_function(
    v: &Potential,
    f: &GridFunction,
    times: &TimeGrid,
    scheme: &SplittingScheme,
) -> Result<GridFunction> {
    let mut out = vec![0.0f64; f.grid().len()];
    for_each_slice(v, f, times, scheme, |_, s| {
        out.iter_mut().zip(s).for_each(|(m, x)| *m = m.max(*x));
    })?;
    Ok(GridFunction::new(f.grid().clone(), out))
}

/// `‖sup_t |K_t f|‖_{L¹(μ)}` over `[t_min, t_max]`, with the same quantity over
/// `[t_min, t_max/2]` and `[t_min, 2 t_max]` for truncation sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyNormReport {
    pub t_min: f64,
    pub t_max: f64,
    pub per_octave: usize,
    pub norm: f64,
    pub norm_half: f64,
    pub norm_double: f64,
}

impl HardyNormReport {
    /// `max(|half/norm - 1|, |double/norm - 1|)`.
    pub fn truncation_sensitivity(&self) -> f64 {
        (self.norm_half / self.norm - 1.0)
            .abs()
            .max((self.norm_double / self.norm - 1.0).abs())
    }
}

pub fn hardy_norm(
    v: &Potential,
    f: &GridFunction,
    t_min: f64,
    t_max: f64,
    per_octave: usize,
    scheme: &SplittingScheme,
) -> Result<HardyNormReport> {
    let top = 2.0 * t_max;
    let base = if v.as_constant().is_some() {
        TimeGrid::log_spaced(t_min, top, per_octave)?
    } else {
        TimeGrid::octave_uniform(t_min, top, per_octave)?
    };
    let half = (0.5 * t_max).max(t_min);
    let mut times = base.times().to_vec();
    times.extend([half, t_max]);
    let grid = TimeGrid::from_times(times)?;
    let w = f.grid().weights();
    let mut running = vec![0.0f64; f.grid().len()];
    let mut snap = [0.0; 3];
    let marks = [half, t_max, top];
    let times = grid.times().to_vec();
    for_each_slice(v, f, &grid, scheme, |k, s| {
        running.iter_mut().zip(s).for_each(|(m, x)| *m = m.max(*x));
        for (slot, &mark) in snap.iter_mut().zip(&marks) {
            if times[k] == mark {
                *slot = running.iter().zip(w).map(|(m, w)| m * w).sum();
            }
        }
    })?;
    Ok(HardyNormReport {
        t_min,
        t_max,
        per_octave,
        norm: snap[1],
        norm_half: snap[0],
        norm_double: snap[2],
    })
}

/// The local norm: times up to `τ²`, starting at `LOCAL_T_MIN τ²`.
pub fn hardy_norm_local(
    v: &Potential,
    f: &GridFunction,
    tau: f64,
    per_octave: usize,
    scheme: &SplittingScheme,
) -> Result<HardyNormReport> {
    check_positive("tau", tau)?;
    hardy_norm(v, f, LOCAL_T_MIN * tau * tau, tau * tau, per_octave, scheme)
}
