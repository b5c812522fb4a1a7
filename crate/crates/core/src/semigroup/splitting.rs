use crate::error::{check_positive, Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::kernel::{heat_apply, HeatMatrix};
use crate::measure::Potential;
use std::collections::VecDeque;
use std::sync::{Arc, Mutex};

/// Strang splitting `e^{-ΔV/2} P_Δ e^{-ΔV/2}` with `⌈t · steps_per_unit⌉` steps (at least
/// `min_steps`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingScheme {
    pub steps_per_unit: f64,
    pub min_steps: usize,
}

impl Default for SplittingScheme {
    fn default() -> Self {
        Self {
            steps_per_unit: 32.0,
            min_steps: 4,
        }
    }
}

impl SplittingScheme {
    pub fn new(steps_per_unit: f64, min_steps: usize) -> Result<Self> {
        check_positive("steps_per_unit", steps_per_unit)?;
        Ok(Self {
            steps_per_unit,
            min_steps: min_steps.max(1),
        })
    }

    /// Number of steps used over a time span.
    pub fn steps(&self, t: f64) -> usize {
        ((t * self.steps_per_unit).ceil() as usize).max(self.min_steps)
    }
}

const CACHE_SLOTS: usize = 6;

/// Evolution on a fixed grid and potential, caching kernel matrices by step size.
#[derive(Debug)]
pub struct Propagator {
    grid: Arc<Grid>,
    potential: Potential,
    cell_potential: Vec<f64>,
    cache: Mutex<VecDeque<(u64, Arc<HeatMatrix>)>>,
}

impl Propagator {
    pub fn new(grid: Arc<Grid>, potential: &Potential) -> Result<Self> {
        let m = *grid.measure();
        let cell_potential: Vec<f64> = (0..grid.len())
            .map(|i| m.potential_integral(potential, &grid.cell(i)) / grid.weights()[i])
            .collect();
        if let Some(i) = cell_potential.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonLocallyIntegrable {
                gamma: potential.power_tail().map_or(f64::NAN, |p| p.gamma),
                alpha: grid.nodes()[i],
            });
        }
        Ok(Self {
            grid,
            potential: potential.clone(),
            cell_potential,
            cache: Mutex::new(VecDeque::new()),
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// Cell averages `μ(C_i)^{-1} ∫_{C_i} V dμ`.
    pub fn cell_potential(&self) -> &[f64] {
        &self.cell_potential
    }

    /// The kernel matrix for one step of length `dt`.
    pub fn matrix(&self, dt: f64) -> Result<Arc<HeatMatrix>> {
        let key = dt.to_bits();
        if let Some(hit) = self.cache.lock().unwrap().iter().find(|e| e.0 == key) {
            return Ok(hit.1.clone());
        }
        let built = Arc::new(HeatMatrix::assemble(&self.grid, dt)?);
        let mut cache = self.cache.lock().unwrap();
        if cache.len() == CACHE_SLOTS {
            cache.pop_front();
        }
        cache.push_back((key, built.clone()));
        Ok(built)
    }

    /// `n` Strang steps of length `dt`, in place. With `killing = false` only the kernel
    /// factor is applied.
    pub fn advance(&self, values: &mut Vec<f64>, dt: f64, n: usize, killing: bool) -> Result<()> {
        let a = self.matrix(dt)?;
        let half: Vec<f64> = self.cell_potential.iter().map(|v| (-0.5 * dt * v).exp()).collect();
        let mut scratch = vec![0.0; values.len()];
        for _ in 0..n {
            if killing {
                values.iter_mut().zip(&half).for_each(|(v, d)| *v *= d);
            }
            a.apply_into(values, &mut scratch);
            std::mem::swap(values, &mut scratch);
            if killing {
                values.iter_mut().zip(&half).for_each(|(v, d)| *v *= d);
            }
        }
        Ok(())
    }

    fn check_grid(&self, f: &GridFunction) -> Result<()> {
        if Arc::ptr_eq(f.grid(), &self.grid) || **f.grid() == *self.grid {
            Ok(())
        } else {
            Err(Error::MixedGrids)
        }
    }

    /// `K_t f` with `n` equal Strang steps.
    pub fn evolve(&self, f: &GridFunction, t: f64, n: usize) -> Result<GridFunction> {
        check_positive("t", t)?;
        self.check_grid(f)?;
        let mut v = f.values().to_vec();
        self.advance(&mut v, t / n as f64, n, true)?;
        Ok(GridFunction::new(self.grid.clone(), v))
    }

    /// The same steps without the potential: `A_{t/n}^n f`.
    pub fn evolve_free(&self, f: &GridFunction, t: f64, n: usize) -> Result<GridFunction> {
        check_positive("t", t)?;
        self.check_grid(f)?;
        let mut v = f.values().to_vec();
        self.advance(&mut v, t / n as f64, n, false)?;
        Ok(GridFunction::new(self.grid.clone(), v))
    }

    /// Evolve through increasing times, calling `visit(k, K_{times[k]} f)` at each.
    ///
    /// Each gap between consecutive times is split into `scheme.steps(gap)` equal steps.
    /// Gaps that agree to relative `1e-9` reuse the same step length.
    pub fn evolve_through(
        &self,
        f: &GridFunction,
        times: &[f64],
        scheme: &SplittingScheme,
        mut visit: impl FnMut(usize, &[f64]),
    ) -> Result<()> {
        self.check_grid(f)?;
        let mut v = f.values().to_vec();
        let mut now = 0.0;
        let mut last_dt = f64::NAN;
        for (k, &t) in times.iter().enumerate() {
            let gap = t - now;
            if gap < 0.0 {
                return Err(Error::InvalidParameter {
                    name: "times",
                    value: t,
                    reason: "times must increase",
                });
            }
            if gap > 0.0 {
                let n = scheme.steps(gap);
                let mut dt = gap / n as f64;
                // equal gaps up to rounding share one cached matrix
                if (dt - last_dt).abs() <= 1e-9 * dt {
                    dt = last_dt;
                }
                self.advance(&mut v, dt, n, true)?;
                last_dt = dt;
            }
            now = t;
            visit(k, &v);
        }
        Ok(())
    }
}

/// `K_t f` by Strang splitting.
///
/// A constant potential commutes with the kernel factor, so a single step is exact and
/// the result is `e^{-ct} P_t f`; `V ≡ 0` gives exactly [`heat_apply`].
pub fn schrodinger_apply(
    v: &Potential,
    t: f64,
    f: &GridFunction,
    scheme: &SplittingScheme,
) -> Result<GridFunction> {
    check_positive("t", t)?;
    match v.as_constant() {
        Some(0.0) => heat_apply(t, f),
        Some(c) => {
            let d = (-0.5 * t * c).exp();
            let out = heat_apply(t, &f.scaled(d))?;
            Ok(out.scaled(d))
        }
        None => {
            let p = Propagator::new(f.grid().clone(), v)?;
            p.evolve(f, t, scheme.steps(t))
        }
    }
}

/// Column `K_t(·, x_j)`: the evolution of the unit point mass at node `j`.
pub fn schrodinger_kernel_column(
    grid: &Arc<Grid>,
    v: &Potential,
    t: f64,
    j: usize,
    scheme: &SplittingScheme,
) -> Result<GridFunction> {
    schrodinger_apply(v, t, &GridFunction::delta(grid.clone(), j), scheme)
}

/// `θ(t) = ∫ K_t(x, z) dμ(x)` for the node `z = x_j`.
pub fn theta_mass(grid: &Arc<Grid>, v: &Potential, j: usize, t: f64, scheme: &SplittingScheme) -> Result<f64> {
    Ok(schrodinger_kernel_column(grid, v, t, j, scheme)?.integral())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::measure::WeightedMeasure;
    use approx::assert_relative_eq;

    fn setup() -> (WeightedMeasure, Arc<Grid>) {
        let m = WeightedMeasure::new(0.5).unwrap();
        let g = Grid::build(&m, GridSpec::new(300, 12.0, 1.05).unwrap(), &[1.0, 2.0, 3.0]).unwrap();
        (m, g)
    }

    #[test]
    fn constant_potential_commutes() {
        let (_, g) = setup();
        let f = GridFunction::from_fn(g.clone(), |x| (-(x - 2.0).powi(2)).exp());
        let s = SplittingScheme::default();
        let k = schrodinger_apply(&Potential::constant(0.7), 0.5, &f, &s).unwrap();
        let h = heat_apply(0.5, &f).unwrap();
        for (a, b) in k.values().iter().zip(h.values()) {
            assert_relative_eq!(*a, (-0.35f64).exp() * b, max_relative = 1e-13);
        }
        let p = Propagator::new(g.clone(), &Potential::constant(0.7)).unwrap();
        let many = p.evolve(&f, 0.5, 16).unwrap();
        let free = p.evolve_free(&f, 0.5, 16).unwrap();
        for (a, b) in many.values().iter().zip(free.values()) {
            assert_relative_eq!(*a, (-0.35f64).exp() * b, max_relative = 1e-12);
        }
    }

    #[test]
    fn domination_is_exact() {
        let (m, g) = setup();
        let v = Potential::piecewise(&m, &[(1.0, 2.0, 3.0), (2.0, 3.0, 0.5)]).unwrap();
        let p = Propagator::new(g.clone(), &v).unwrap();
        let f = GridFunction::from_fn(g.clone(), |x| if x < 4.0 { 1.0 + x.sin() } else { 0.0 });
        let k = p.evolve(&f, 0.8, 20).unwrap();
        let h = p.evolve_free(&f, 0.8, 20).unwrap();
        assert!(k.values().iter().zip(h.values()).all(|(a, b)| 0.0 <= *a && a <= b));
        assert!(k.l1_norm() <= f.l1_norm());
    }
}
