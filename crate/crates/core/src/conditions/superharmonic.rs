use super::profile::SuperharmonicProfile;
use crate::error::Result;
use crate::grid::{Grid, GridFunction, GridSpec};
use crate::hardy::TimeGrid;
use crate::kernel::KernelEval;
use crate::measure::WeightedMeasure;
use crate::quad;
use crate::semigroup::{Propagator, SplittingScheme};
use serde::Serialize;
use std::sync::Arc;

/// Relative slack allowed per time step.
pub const SLACK: f64 = 1e-6;

/// `ϑ(u) = K_u φ_I(z)` along a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperharmonicReport {
    pub z: f64,
    pub phi_z: f64,
    /// `(u, ϑ(u))`.
    pub theta: Vec<(f64, f64)>,
    /// Largest `ϑ(u_{k+1})/ϑ(u_k) - 1`.
    pub worst_increase: f64,
    /// Largest `ϑ(u)/φ_I(z) - 1`.
    pub worst_excess: f64,
    /// Bound on `∫_{x > x_max} P_u(z, x) φ_I(x) dμ(x)`, the part cut off by the grid.
    pub tail_bound: f64,
    pub non_increasing: bool,
    pub bounded: bool,
}

impl SuperharmonicReport {
    pub fn passed(&self) -> bool {
        self.non_increasing && self.bounded
    }
}

/// A grid for `φ_I`: cells of width about `|I|/64` up to `2 sup(J ∪ {z})`, then growing
/// by 5% per cell to `reach √u_max` beyond that, with the edges of `J` and the
/// potential's breakpoints as cell edges.
pub fn profile_grid(p: &SuperharmonicProfile, z: f64, u_max: f64, reach: f64) -> Result<Arc<Grid>> {
    let m = WeightedMeasure::new(p.alpha())?;
    let x_fine = 2.0 * p.j.hi().max(z);
    let h = p.host.len() / 64.0;
    let cells = (x_fine / h).ceil() as usize + 180;
    let x_max = x_fine + reach * u_max.sqrt();
    let mut breaks = p.potential().breakpoints();
    breaks.extend([p.j.lo(), p.j.hi()]);
    breaks.retain(|&b| b > 0.0 && b < x_max);
    Grid::build_graded(&m, GridSpec::new(cells, x_fine, 1.04)?, x_max, 1.05, &breaks)
}

/// `μ(C)^{-1} ∫_C φ_I dμ` on every cell.
fn cell_averages(grid: &Arc<Grid>, p: &SuperharmonicProfile) -> GridFunction {
    let a = p.alpha();
    let values = (0..grid.len())
        .map(|i| {
            let c = grid.cell(i);
            let f = |x: f64| p.eval(x).0;
            quad::power_weighted(f, c.lo(), c.hi(), a, c.len(), 4) / grid.weights()[i]
        })
        .collect();
    GridFunction::new(grid.clone(), values)
}

/// Steps of at most `|I|²/4`, one per gap when the gaps are shorter.
pub fn profile_scheme(p: &SuperharmonicProfile) -> SplittingScheme {
    let len = p.host.len();
    SplittingScheme {
        steps_per_unit: 4.0 / (len * len),
        min_steps: 1,
    }
}

/// Evolve the cell averages of `φ_I` on `grid` and follow `K_u φ_I` in the cell of `z`.
///
/// `ϑ` is compared with the cell average of `φ_I` there, the quantity the grid evolves.
pub fn check_superharmonic(
    grid: &Arc<Grid>,
    p: &SuperharmonicProfile,
    z: f64,
    times: &TimeGrid,
    scheme: &SplittingScheme,
) -> Result<SuperharmonicReport> {
    let node = grid.nearest_node(z);
    let z = grid.nodes()[node];
    let phi = cell_averages(grid, p);
    let phi_z = phi.values()[node];
    let prop = Propagator::new(grid.clone(), p.potential())?;
    let mut theta = Vec::with_capacity(times.len());
    prop.evolve_through(&phi, times.times(), scheme, |k, s| theta.push((times.times()[k], s[node])))?;

    let m = WeightedMeasure::new(p.alpha())?;
    let x_max = grid.x_max();
    let mut tail_bound = 0.0f64;
    for &u in times.times() {
        let k = KernelEval::new(&m, u)?;
        let end = x_max + k.band();
        let f = |x: f64| k.value(z, x) * p.eval(x).0;
        let tail = quad::power_weighted(f, x_max, end, p.alpha(), 0.5 * u.sqrt(), 8);
        tail_bound = tail_bound.max(tail);
    }

    let mut worst_increase = f64::NEG_INFINITY;
    let mut prev = phi_z;
    for &(_, th) in &theta {
        worst_increase = worst_increase.max(th / prev - 1.0);
        prev = th;
    }
    let worst_excess = theta.iter().map(|&(_, th)| th / phi_z - 1.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(SuperharmonicReport {
        z,
        phi_z,
        theta,
        worst_increase,
        worst_excess,
        tail_bound,
        non_increasing: worst_increase <= SLACK,
        bounded: worst_excess <= SLACK,
    })
}
