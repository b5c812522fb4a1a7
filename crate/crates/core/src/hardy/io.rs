use super::atom::{Atom, AtomKind, AtomicCombination, Host};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::measure::Interval;
use serde::{Deserialize, Serialize};
use std::fmt::Write;
use std::sync::Arc;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    kind: AtomKind,
    support: Interval,
    host: Option<Host>,
    lambda: f64,
}

/// `# {json header}` followed by `node,value` rows over the support.
pub fn atom_to_csv(lambda: f64, atom: &Atom) -> String {
    let header = Header {
        kind: atom.kind(),
        support: atom.support(),
        host: atom.host(),
        lambda,
    };
    let mut s = format!("# {}\nnode,value\n", serde_json::to_string(&header).expect("plain data"));
    let nodes = atom.grid().nodes();
    let values = atom.values().values();
    for i in atom.cells() {
        writeln!(s, "{},{}", nodes[i], values[i]).unwrap();
    }
    s
}

/// Atom blocks one after another.
pub fn combination_to_csv(combo: &AtomicCombination) -> String {
    combo.terms.iter().map(|(l, a)| atom_to_csv(*l, a)).collect()
}

/// Read atoms written by [`atom_to_csv`] or [`combination_to_csv`] back onto `grid`.
/// Every atom is validated.
pub fn combination_from_csv(grid: &Arc<Grid>, text: &str) -> Result<AtomicCombination> {
    let mut terms = Vec::new();
    let mut current: Option<(Header, Vec<f64>, Vec<usize>)> = None;
    let finish = |block: Option<(Header, Vec<f64>, Vec<usize>)>, terms: &mut Vec<(f64, Atom)>, line: usize| -> Result<()> {
        let Some((h, values, idx)) = block else { return Ok(()) };
        let (Some(&lo), Some(&hi)) = (idx.first(), idx.last()) else {
            return Err(Error::Parse { line, message: "atom without rows".into() });
        };
        if idx.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::Parse { line, message: "rows must be consecutive grid nodes".into() });
        }
        let mut full = vec![0.0; grid.len()];
        for (i, v) in idx.iter().zip(values) {
            full[*i] = v;
        }
        let atom = Atom::from_raw(h.kind, lo..hi + 1, h.host, GridFunction::new(grid.clone(), full));
        atom.validate()?;
        terms.push((h.lambda, atom));
        Ok(())
    };
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.trim();
        if let Some(json) = content.strip_prefix('#') {
            finish(current.take(), &mut terms, line)?;
            let h: Header = serde_json::from_str(json.trim()).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            current = Some((h, Vec::new(), Vec::new()));
        } else if content.is_empty() || content == "node,value" {
            continue;
        } else {
            let Some((_, values, idx)) = current.as_mut() else {
                return Err(Error::Parse { line, message: "row before header".into() });
            };
            let mut it = content.split(',');
            let mut num = || -> Result<f64> {
                it.next()
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or(Error::Parse { line, message: format!("bad row `{content}`") })
            };
            let (x, v) = (num()?, num()?);
            let i = grid.nearest_node(x);
            if (grid.nodes()[i] - x).abs() > 1e-12 * x.max(1.0) {
                return Err(Error::Parse { line, message: format!("node {x} is not on the grid") });
            }
            idx.push(i);
            values.push(v);
        }
    }
    finish(current, &mut terms, text.lines().count())?;
    Ok(AtomicCombination::new(terms))
}

/// Read a single atom and its coefficient.
pub fn atom_from_csv(grid: &Arc<Grid>, text: &str) -> Result<(f64, Atom)> {
    let mut c = combination_from_csv(grid, text)?;
    if c.terms.len() != 1 {
        return Err(Error::Parse {
            line: 0,
            message: format!("expected one atom, found {}", c.terms.len()),
        });
    }
    Ok(c.terms.pop().unwrap())
}
