use super::KernelEval;
use crate::error::Result;
use crate::grid::{Grid, GridFunction};
use crate::quad;
use rayon::prelude::*;
use std::ops::Range;

/// Gauss nodes `(x, w · x^α)` covering part of a cell.
struct Panel {
    lo: f64,
    hi: f64,
    pts: Vec<(f64, f64)>,
}

/// Panels of width at most `0.75√t` on `[lo, hi]`, with 2, 4 or 8 nodes by width; a
/// Gauss–Jacobi panel absorbs the weight at the origin.
fn panels(k: &KernelEval, lo: f64, hi: f64) -> Vec<Panel> {
    let alpha = k.alpha();
    let s = k.t().sqrt();
    let width = 0.75 * s;
    let count = ((hi - lo) / width).ceil().max(1.0) as usize;
    let step = (hi - lo) / count as f64;
    (0..count)
        .map(|p| {
            let a = lo + p as f64 * step;
            let b = if p + 1 == count { hi } else { a + step };
            let n = if b - a <= 0.08 * s {
                2
            } else if b - a <= 0.25 * s {
                4
            } else {
                8
            };
            let pts = if a == 0.0 {
                let scale = b.powf(alpha + 1.0);
                quad::jacobi_origin(alpha, n).iter().map(|&(u, w)| (b * u, w * scale)).collect()
            } else {
                let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
                quad::legendre(n)
                    .iter()
                    .map(|&(u, w)| {
                        let x = m + h * u;
                        (x, w * h * x.powf(alpha))
                    })
                    .collect()
            };
            Panel { lo: a, hi: b, pts }
        })
        .collect()
}

/// `∫_{[a,b]} ∫_{[c,d]} P_t(x, y) dμ(y) dμ(x)`, dropping pairs farther apart than the band.
fn pair_integral(k: &KernelEval, (a, b): (f64, f64), (c, d): (f64, f64)) -> f64 {
    let band = k.band();
    let (xa, xb) = (a.max(c - band), b.min(d + band));
    let (yc, yd) = (c.max(a - band), d.min(b + band));
    if xb <= xa || yd <= yc {
        return 0.0;
    }
    let xs = panels(k, xa, xb);
    let ys = panels(k, yc, yd);
    let mut total = 0.0;
    for p in &xs {
        for q in &ys {
            if q.lo - p.hi > band || p.lo - q.hi > band {
                continue;
            }
            for &(x, wx) in &p.pts {
                let inner: f64 = q.pts.iter().map(|&(y, wy)| wy * k.value(x, y)).sum();
                total += wx * inner;
            }
        }
    }
    total
}

/// Entries of row `i` for the columns `cols`, scaled by `μ(C_i)`: the off-diagonal double
/// integrals, and the diagonal from `∫_0^∞ P_t(x, y) dμ(y) = 1`.
fn scaled_row(grid: &Grid, k: &KernelEval, i: usize, cols: &Range<usize>) -> (usize, Vec<f64>) {
    let band = k.band();
    let e = grid.edges();
    let cell = (e[i], e[i + 1]);
    let lo = grid.locate(cell.0 - band);
    let hi = (grid.locate(cell.1 + band) + 1).min(grid.len());
    let with_diag = cols.contains(&i);
    let (lo, hi) = if with_diag { (lo, hi) } else { (lo.max(cols.start), hi.min(cols.end)) };
    if hi <= lo {
        return (lo, Vec::new());
    }
    let mut vals: Vec<f64> = (lo..hi)
        .map(|j| if j == i { 0.0 } else { pair_integral(k, cell, (e[j], e[j + 1])) })
        .collect();
    if with_diag {
        let x_max = grid.x_max();
        let escape = pair_integral(k, cell, (x_max, x_max + band));
        let off: f64 = vals.iter().sum();
        vals[i - lo] = (grid.weights()[i] - off - escape).max(0.0);
        let start = lo.max(cols.start);
        let end = hi.min(cols.end);
        return (start, vals[start - lo..end - lo].to_vec());
    }
    (lo, vals)
}

/// `A_ij = μ(C_i)^{-1} ∫_{C_i} ∫_{C_j} P_t(x, y) dμ(y) dμ(x)`: the heat semigroup compressed
/// to cell-wise constant functions, stored by banded rows.
///
/// Rows and columns sum to at most 1 (less only where mass escapes past `x_max`), all
/// entries are nonnegative, and `μ(C_i) A_ij = μ(C_j) A_ji` up to quadrature error.
#[derive(Debug, Clone)]
pub struct HeatMatrix {
    t: f64,
    rows: Vec<(usize, Vec<f64>)>,
}

impl HeatMatrix {
    /// Full matrix on `grid`.
    pub fn assemble(grid: &Grid, t: f64) -> Result<Self> {
        let k = KernelEval::new(grid.measure(), t)?;
        let band = k.band();
        let e = grid.edges();
        let w = grid.weights();
        let x_max = grid.x_max();
        // Upper triangle and escape mass, one row per task.
        let upper: Vec<(Vec<f64>, f64)> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let cell = (e[i], e[i + 1]);
                let hi = (grid.locate(cell.1 + band) + 1).min(grid.len());
                let vals = (i + 1..hi).map(|j| pair_integral(&k, cell, (e[j], e[j + 1]))).collect();
                (vals, pair_integral(&k, cell, (x_max, x_max + band)))
            })
            .collect();
        let n = grid.len();
        let mut lower_start = vec![usize::MAX; n];
        let mut lower: Vec<Vec<f64>> = vec![Vec::new(); n];
        for (i, (vals, _)) in upper.iter().enumerate() {
            for (c, &s) in vals.iter().enumerate() {
                let j = i + 1 + c;
                if lower_start[j] == usize::MAX {
                    lower_start[j] = i;
                }
                let pad = i - lower_start[j];
                lower[j].resize(pad, 0.0);
                lower[j].push(s);
            }
        }
        let rows = (0..n)
            .map(|i| {
                let start = lower_start[i].min(i);
                let mut row = lower[i].clone();
                row.resize(i - start, 0.0);
                let off: f64 = row.iter().sum::<f64>() + upper[i].0.iter().sum::<f64>();
                row.push((w[i] - off - upper[i].1).max(0.0));
                row.extend_from_slice(&upper[i].0);
                row.iter_mut().for_each(|v| *v /= w[i]);
                (start, row)
            })
            .collect();
        Ok(Self { t, rows })
    }

    /// Matrix acting on functions supported in the cells `cols`.
    pub fn assemble_columns(grid: &Grid, t: f64, cols: Range<usize>) -> Result<Self> {
        let k = KernelEval::new(grid.measure(), t)?;
        let rows = (0..grid.len())
            .into_par_iter()
            .map(|i| Self::normalize(grid, i, scaled_row(grid, &k, i, &cols)))
            .collect();
        Ok(Self { t, rows })
    }

    /// Row `i`: (first column, entries).
    pub fn row(grid: &Grid, t: f64, i: usize) -> Result<(usize, Vec<f64>)> {
        let k = KernelEval::new(grid.measure(), t)?;
        Ok(Self::normalize(grid, i, scaled_row(grid, &k, i, &(0..grid.len()))))
    }

    fn normalize(grid: &Grid, i: usize, (start, mut vals): (usize, Vec<f64>)) -> (usize, Vec<f64>) {
        let w = grid.weights()[i];
        vals.iter_mut().for_each(|v| *v /= w);
        (start, vals)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.1.len()).sum()
    }

    /// `out_i = Σ_j A_ij f_j`.
    pub fn apply_into(&self, f: &[f64], out: &mut [f64]) {
        for ((start, vals), o) in self.rows.iter().zip(out.iter_mut()) {
            *o = vals.iter().zip(&f[*start..]).map(|(a, b)| a * b).sum();
        }
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows.len()];
        self.apply_into(f, &mut out);
        out
    }

    /// `Σ_j A_ij`, the kernel mass kept on the grid from each cell.
    pub fn row_sums(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.1.iter().sum()).collect()
    }
}

/// `P_t f` on the grid of `f`, as cell averages of the exact kernel's action.
pub fn heat_apply(t: f64, f: &GridFunction) -> Result<GridFunction> {
    let support = f.support();
    let matrix = HeatMatrix::assemble_columns(f.grid(), t, support)?;
    Ok(GridFunction::new(f.grid().clone(), matrix.apply(f.values())))
}
