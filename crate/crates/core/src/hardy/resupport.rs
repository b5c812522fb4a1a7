use super::atom::{Atom, AtomKind, Host};
use super::cutoff::Cutoff;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::measure::Interval;
use serde::Serialize;

/// The pieces `λ_j b_j` of `ψa`, each `b_j` an atom for the host.
#[derive(Debug, Clone, PartialEq)]
pub struct Resupport {
    pub terms: Vec<(f64, Atom)>,
    /// `∫ ψ a dμ`.
    pub lambda: f64,
    /// Length of the doubling chain.
    pub n: usize,
    /// `K = I_0 ⊂ I_1 ⊂ … ⊂ I_N`.
    pub chain: Vec<Interval>,
}

impl Resupport {
    pub fn certificate(&self) -> f64 {
        self.terms.iter().map(|(l, _)| l.abs()).sum()
    }

    pub fn synthesize(&self, like: &GridFunction) -> Result<GridFunction> {
        let mut f = GridFunction::zeros(like.grid().clone());
        for (l, a) in &self.terms {
            f = f.axpy(*l, a.values())?;
        }
        Ok(f)
    }
}

/// Summary numbers for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResupportSummary {
    pub lambda: f64,
    pub n: usize,
    pub terms: usize,
    pub certificate: f64,
}

impl From<&Resupport> for ResupportSummary {
    fn from(r: &Resupport) -> Self {
        Self {
            lambda: r.lambda,
            n: r.n,
            terms: r.terms.len(),
            certificate: r.certificate(),
        }
    }
}

fn check_cutoff(host: &Host, psi: &Cutoff, slope_constant: f64) -> Result<()> {
    let (star, outer) = (host.star(), host.double_star());
    if !star.is_subset_of(&psi.inner()) {
        return Err(Error::CutoffViolation {
            x: star.hi(),
            reason: "ψ must equal 1 on I*",
        });
    }
    if !psi.outer().is_subset_of(&outer) {
        return Err(Error::CutoffViolation {
            x: psi.outer().hi(),
            reason: "ψ must vanish outside I**",
        });
    }
    if psi.max_slope() * host.interval.len() > slope_constant {
        return Err(Error::CutoffViolation {
            x: psi.inner().hi(),
            reason: "‖ψ'‖∞ exceeds C/|I|",
        });
    }
    Ok(())
}

/// Split `ψa` for a mean-zero atom `a` into atoms adapted to the host interval `I`.
///
/// With `K = J ∩ I**`, `λ = ∫ψa dμ` and a chain `K = I_0 ⊂ … ⊂ I_N ⊂ I**` of doublings
/// (`2^{-N-1}|I| ≤ |K| ≤ 2^{-N}|I|`),
///
/// ```text
/// ψa = (ψa - λ ā_0) + Σ_{j=1}^{N} λ(ā_{j-1} - ā_j) + λ(ā_N - ā_I) + λ ā_I
/// ```
///
/// where `ā_X = μ(X)^{-1} 1_X`. All but the last term are cancellative atoms for `I`
/// after normalisation; the last is the local atom on `I`. `ψ` must equal 1 on `I*`,
/// vanish off `I**` and satisfy `‖ψ'‖∞ ≤ slope_constant/|I|`.
pub fn resupport_atom(a: &Atom, host: &Host, psi: &Cutoff, slope_constant: f64) -> Result<Resupport> {
    check_cutoff(host, psi, slope_constant)?;
    if a.kind() == AtomKind::Local {
        return Err(Error::InvalidParameter {
            name: "atom",
            value: f64::NAN,
            reason: "resupporting needs a mean-zero atom",
        });
    }
    a.validate()?;
    let grid = a.grid().clone();
    let j = a.support();
    let outer = host.double_star();
    let empty = Resupport {
        terms: Vec::new(),
        lambda: 0.0,
        n: 0,
        chain: Vec::new(),
    };
    if j.is_subset_of(&host.star()) {
        return Ok(Resupport {
            terms: vec![(1.0, a.clone())],
            ..empty
        });
    }
    let Some(k) = j.intersect(&outer) else {
        return Ok(empty);
    };
    let nodes = grid.nodes();
    let psi_a: Vec<f64> = a.values().values().iter().zip(nodes).map(|(v, &x)| v * psi.value(x)).collect();
    let psi_a = GridFunction::new(grid.clone(), psi_a);
    if psi_a.sup_norm() == 0.0 {
        return Ok(empty);
    }
    let lambda = psi_a.integral();
    let i_len = host.interval.len();
    let n = if k.len() >= i_len { 0 } else { (i_len / k.len()).log2().floor() as usize };

    let mut chain = vec![k];
    for _ in 0..n {
        let prev = *chain.last().unwrap();
        let len = (2.0 * prev.len()).min(outer.len());
        let lo = (prev.center() - 0.5 * len).clamp(outer.lo(), outer.hi() - len);
        chain.push(Interval::of(lo, lo + len));
    }
    let cells: Vec<_> = chain.iter().map(|c| grid.snap(c)).collect();
    let host_cells = grid.snap(&host.interval);
    if cells.iter().chain([&host_cells]).any(|c| c.is_empty()) {
        return Err(Error::InvalidParameter {
            name: "grid",
            value: k.len(),
            reason: "grid too coarse to resolve the resupport chain",
        });
    }
    let bar = |r: &std::ops::Range<usize>| GridFunction::normalized_indicator(grid.clone(), r.clone());
    let bars: Vec<GridFunction> = cells.iter().map(bar).collect();
    let host_bar = bar(&host_cells);
    let cancel = |cells: std::ops::Range<usize>, b: GridFunction| {
        Atom::from_parts(AtomKind::Cancellative, cells, Some(*host), b)
    };

    let mut terms = Vec::with_capacity(n + 3);
    // b_0 lives on K: ψa does, and so does the first indicator
    // differences at rounding level are dropped rather than normalised into atoms
    let negligible = |b: &GridFunction, reference: f64| b.sup_norm() <= 1e-13 * reference;
    let b0 = psi_a.axpy(-lambda, &bars[0])?;
    if !negligible(&b0, psi_a.sup_norm()) {
        terms.push(cancel(cells[0].clone(), b0)?);
    }
    if lambda != 0.0 {
        for jdx in 1..=n {
            let b = bars[jdx - 1].axpy(-1.0, &bars[jdx])?.scaled(lambda);
            if !negligible(&b, lambda.abs() * bars[jdx - 1].sup_norm()) {
                terms.push(cancel(cells[jdx].clone(), b)?);
            }
        }
        let last = &cells[n];
        let hull = last.start.min(host_cells.start)..last.end.max(host_cells.end);
        let b = bars[n].axpy(-1.0, &host_bar)?.scaled(lambda);
        if !negligible(&b, lambda.abs() * bars[n].sup_norm().max(host_bar.sup_norm())) {
            terms.push(cancel(hull, b)?);
        }
        terms.push((lambda, Atom::local(&grid, *host)?));
    }
    Ok(Resupport {
        terms,
        lambda,
        n,
        chain,
    })
}
