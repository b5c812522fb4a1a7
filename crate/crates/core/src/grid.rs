//! Cell grids on `(0, x_max]` and functions that are constant on each cell.

use crate::error::{check_positive, Error, Result};
use crate::measure::{Interval, WeightedMeasure};
use std::ops::Range;
use std::sync::Arc;

/// Ratio between the first positive edge and the end of the geometric zone.
const GEOMETRIC_DEPTH: f64 = 1e-3;

/// Shape of a grid: about `cells` cells up to `x_max`, growing geometrically by `ratio`
/// near the origin and uniform further out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub cells: usize,
    pub x_max: f64,
    pub ratio: f64,
}

impl GridSpec {
    pub fn new(cells: usize, x_max: f64, ratio: f64) -> Result<Self> {
        check_positive("x_max", x_max)?;
        if !(ratio > 1.0 && ratio.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "ratio",
                value: ratio,
                reason: "geometric ratio must exceed 1",
            });
        }
        let geometric = (1.0 / GEOMETRIC_DEPTH).ln() / ratio.ln();
        if (cells as f64) < geometric + 4.0 {
            return Err(Error::InvalidParameter {
                name: "cells",
                value: cells as f64,
                reason: "too few cells for the geometric zone at this ratio",
            });
        }
        Ok(Self { cells, x_max, ratio })
    }

    fn base_edges(&self) -> Vec<f64> {
        let r = self.ratio;
        let k = ((1.0 / GEOMETRIC_DEPTH).ln() / r.ln()).ceil() as usize;
        let h = self.x_max / ((self.cells - k - 1) as f64 + 1.0 / (r - 1.0));
        let x_t = (h / (r - 1.0)).min(self.x_max);
        let mut edges = vec![0.0];
        edges.extend((0..=k).rev().map(|j| x_t * r.powi(-(j as i32))));
        let uniform = ((self.x_max - x_t) / h).round() as usize;
        if uniform > 0 {
            let h = (self.x_max - x_t) / uniform as f64;
            edges.extend((1..=uniform).map(|j| x_t + j as f64 * h));
        }
        *edges.last_mut().unwrap() = self.x_max;
        edges.dedup();
        edges
    }
}

/// A partition `0 = e_0 < e_1 < … < e_n = x_max` with nodes at the `μ`-centroids of the
/// cells and weights equal to the exact cell masses.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    measure: WeightedMeasure,
    edges: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// Build from a spec, inserting `breakpoints` as cell edges.
    pub fn build(m: &WeightedMeasure, spec: GridSpec, breakpoints: &[f64]) -> Result<Arc<Self>> {
        Self::with_breakpoints(m, spec.base_edges(), breakpoints)
    }

    /// `spec` up to `spec.x_max`, then cells growing by `growth` up to `x_max`.
    pub fn build_graded(
        m: &WeightedMeasure,
        spec: GridSpec,
        x_max: f64,
        growth: f64,
        breakpoints: &[f64],
    ) -> Result<Arc<Self>> {
        if !(growth > 1.0 && growth.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "growth",
                value: growth,
                reason: "growth factor must exceed 1",
            });
        }
        let mut edges = spec.base_edges();
        let n = edges.len();
        let mut w = edges[n - 1] - edges[n - 2];
        let mut last = edges[n - 1];
        while last < x_max {
            w *= growth;
            last = if x_max - last < 1.5 * w { x_max } else { last + w };
            edges.push(last);
        }
        Self::with_breakpoints(m, edges, breakpoints)
    }

    fn with_breakpoints(m: &WeightedMeasure, mut edges: Vec<f64>, breakpoints: &[f64]) -> Result<Arc<Self>> {
        let x_max = *edges.last().expect("at least one cell");
        let mut pinned = vec![false; edges.len()];
        pinned[0] = true;
        *pinned.last_mut().unwrap() = true;
        let mut points: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|&b| b > 0.0 && b < x_max)
            .collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        for b in points {
            let k = edges.partition_point(|&e| e < b);
            if edges[k] == b {
                pinned[k] = true;
                continue;
            }
            // b lies in (edges[k-1], edges[k]).
            let (lo, hi) = (edges[k - 1], edges[k]);
            let width = hi - lo;
            let near = if b - lo < hi - b { k - 1 } else { k };
            let room = |j: usize| {
                let left = edges[j] - edges[j - 1];
                let right = edges.get(j + 1).map_or(f64::INFINITY, |e| e - edges[j]);
                left.min(right)
            };
            if !pinned[near] && (b - edges[near]).abs() < 0.3 * width && (b - edges[near]).abs() < 0.3 * room(near) {
                edges[near] = b;
                pinned[near] = true;
            } else {
                edges.insert(k, b);
                pinned.insert(k, true);
            }
        }
        Self::from_edges(m, edges).map(Arc::new)
    }

    /// Grid with the given edges, the first of which must be 0.
    pub fn from_edges(m: &WeightedMeasure, edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges[0] != 0.0 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter {
                name: "edges",
                value: edges.len() as f64,
                reason: "edges must start at 0 and increase strictly",
            });
        }
        let cells: Vec<Interval> = edges.windows(2).map(|w| Interval::of(w[0], w[1])).collect();
        let nodes = cells.iter().map(|c| m.centroid(c)).collect();
        let weights = cells.iter().map(|c| m.mu(c)).collect();
        Ok(Self {
            measure: *m,
            edges,
            nodes,
            weights,
        })
    }

    pub fn measure(&self) -> &WeightedMeasure {
        &self.measure
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn x_max(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    pub fn cell(&self, i: usize) -> Interval {
        Interval::of(self.edges[i], self.edges[i + 1])
    }

    /// Index of the cell containing `x`, clamped to the grid.
    pub fn locate(&self, x: f64) -> usize {
        self.edges[1..].partition_point(|&e| e < x).min(self.len() - 1)
    }

    /// Index of the node nearest to `x`.
    pub fn nearest_node(&self, x: f64) -> usize {
        let i = self.nodes.partition_point(|&n| n < x);
        if i == 0 {
            0
        } else if i == self.len() || x - self.nodes[i - 1] <= self.nodes[i] - x {
            i - 1
        } else {
            i
        }
    }

    /// Cells whose node lies in `interval`.
    pub fn snap(&self, interval: &Interval) -> Range<usize> {
        let lo = self.nodes.partition_point(|&n| n < interval.lo());
        let hi = self.nodes.partition_point(|&n| n <= interval.hi());
        lo..hi.max(lo)
    }

    /// Union of the cells in `range`.
    pub fn span(&self, range: &Range<usize>) -> Option<Interval> {
        (range.end > range.start).then(|| Interval::of(self.edges[range.start], self.edges[range.end]))
    }

    /// Whether `x` is (up to rounding) a cell edge.
    pub fn has_edge(&self, x: f64) -> bool {
        let k = self.edges.partition_point(|&e| e < x);
        let tol = 1e-12 * x.max(1.0);
        [k.saturating_sub(1), k]
            .iter()
            .any(|&j| j < self.edges.len() && (self.edges[j] - x).abs() <= tol)
    }

    /// Largest cell width inside `[lo, hi]`.
    pub fn max_width(&self, lo: f64, hi: f64) -> f64 {
        let (a, b) = (self.locate(lo), self.locate(hi));
        (a..=b).map(|i| self.edges[i + 1] - self.edges[i]).fold(0.0, f64::max)
    }
}

/// A function that is constant on each cell of a grid, stored by its node values.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        assert_eq!(grid.len(), values.len(), "one value per cell");
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self::new(grid, vec![0.0; n])
    }

    /// Sample `f` at the nodes.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self { grid, values }
    }

    /// `μ(cells)^{-1}` on the cells of `range`, zero elsewhere.
    pub fn normalized_indicator(grid: Arc<Grid>, range: Range<usize>) -> Self {
        let mass: f64 = grid.weights()[range.clone()].iter().sum();
        let mut values = vec![0.0; grid.len()];
        for v in &mut values[range] {
            *v = 1.0 / mass;
        }
        Self { grid, values }
    }

    /// The discrete point mass at node `j` normalised by its cell mass.
    pub fn delta(grid: Arc<Grid>, j: usize) -> Self {
        Self::normalized_indicator(grid, j..j + 1)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid
    }

    /// `∫ f dμ`.
    pub fn integral(&self) -> f64 {
        self.values.iter().zip(self.grid.weights()).map(|(v, w)| v * w).sum()
    }

    /// `‖f‖_{L¹(μ)}`.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().zip(self.grid.weights()).map(|(v, w)| v.abs() * w).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Linear interpolation between node values; constant beyond the first and last nodes.
    pub fn interpolate(&self, x: f64) -> f64 {
        let nodes = self.grid.nodes();
        let n = nodes.len();
        if x <= nodes[0] {
            return self.values[0];
        }
        if x >= nodes[n - 1] {
            return self.values[n - 1];
        }
        let j = nodes.partition_point(|&p| p <= x) - 1;
        let w = (x - nodes[j]) / (nodes[j + 1] - nodes[j]);
        (1.0 - w) * self.values[j] + w * self.values[j + 1]
    }

    /// Smallest cell range outside which `f` vanishes.
    pub fn support(&self) -> Range<usize> {
        let lo = self.values.iter().position(|&v| v != 0.0);
        let hi = self.values.iter().rposition(|&v| v != 0.0);
        match (lo, hi) {
            (Some(lo), Some(hi)) => lo..hi + 1,
            _ => 0..0,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self + c · other`.
    pub fn axpy(&self, c: f64, other: &GridFunction) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::MixedGrids);
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect(),
        })
    }
}
