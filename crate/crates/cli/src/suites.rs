//! One function per subcommand. Each appends checks and tables to a [`Report`].

use crate::config::RunConfig;
use crate::report::{Report, Table};
use crate::row;
use bessel_hardy::conditions::*;
use bessel_hardy::grid::{Grid, GridFunction, GridSpec};
use bessel_hardy::hardy::*;
use bessel_hardy::kernel::{gaussian_bound_constants, heat_apply, KernelEval, SampleSpec};
use bessel_hardy::measure::{Interval, LengthConvention, Potential};
use bessel_hardy::section::*;
use bessel_hardy::semigroup::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Display;
use std::sync::Arc;

fn e(err: impl Display) -> String {
    err.to_string()
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::NEG_INFINITY, f64::max)
}

pub fn kernel(cfg: &RunConfig, r: &mut Report) {
    let m = cfg.measure;
    let tol = cfg.tol("mass");
    let mut table = Table::new("kernel_mass.csv", &["t", "y", "mass", "residual", "error_estimate"]);
    r.check("kernel", "normalization", || {
        let mut worst = (0.0, 0.0, 0.0);
        for t in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let k = KernelEval::new(&m, t).map_err(e)?;
            for y in [0.1, 1.0, 10.0] {
                let rep = k.mass_residual(y, 1e-2 * tol).map_err(e)?;
                table.push(row![t, y, rep.mass, rep.residual, rep.error_estimate]);
                if rep.residual >= worst.0 {
                    worst = (rep.residual, t, y);
                }
            }
        }
        Ok((worst.0 < tol, format!("largest |mass - 1| = {:e} at t={} y={}", worst.0, worst.1, worst.2)))
    });
    r.tables.push(table);

    let mut table = Table::new("kernel_gaussian.csv", &["constant", "value"]);
    let mut constants = Vec::new();
    r.check("kernel", "gaussian_bounds", || {
        let spec = SampleSpec {
            samples: 2000,
            seed: cfg.seed,
            ..SampleSpec::default()
        };
        let rep = gaussian_bound_constants(&m, spec).map_err(e)?;
        for (k, v) in [
            ("C", rep.c),
            ("c1", rep.c1),
            ("c2", rep.c2),
            ("C_derivative", rep.c_derivative),
            ("derivative_rate", rep.derivative_rate),
        ] {
            table.push(row![k, v]);
            constants.push((format!("kernel.{k}"), v));
        }
        let detail = match rep.violations.first() {
            None => format!("C={} c1={} c2={} on {} samples", rep.c, rep.c1, rep.c2, spec.samples),
            Some(w) => format!("{} violations, first at x={} y={} t={}", rep.violations.len(), w.x, w.y, w.t),
        };
        Ok((rep.holds(), detail))
    });
    for (k, v) in constants {
        r.constant(&k, v);
    }
    r.tables.push(table);
}

pub fn section(cfg: &RunConfig, r: &mut Report) -> Result<ProperSection, String> {
    let (m, v) = (&cfg.measure, &cfg.potential);
    let mut built = Err(String::new());
    let mut table = Table::new("section.csv", &["index", "dyadic", "lo", "hi", "length", "f", "f_parent"]);
    r.check("section", "build", || {
        let s = build_section(m, v, &cfg.window, LengthConvention::default()).map_err(|err| {
            built = Err(e(&err));
            e(err)
        })?;
        for (i, d) in s.iter().enumerate() {
            let iv = d.interval();
            let f = s_functional(m, v, &iv, s.convention);
            let fp = s_functional(m, v, &d.parent().interval(), s.convention);
            table.push(row![i, d, iv.lo(), iv.hi(), iv.len(), f, fp]);
        }
        let detail = format!("{} intervals, C0 = {}", s.len(), s.c0);
        built = Ok(s);
        Ok((true, detail))
    });
    r.tables.push(table);
    if let Ok(s) = &built {
        r.check("section", "axioms", || {
            let rep = validate_section(s);
            let detail = if rep.passed() {
                format!("disjoint, covering, beta {} below {}", rep.beta, rep.beta_bound)
            } else {
                format!("overlap {:?}, gaps {:?}, beta {} vs bound {}", rep.overlap, rep.gaps, rep.beta, rep.beta_bound)
            };
            Ok((rep.passed(), detail))
        });
        r.check("section", "stopping_rule", || {
            let bad = stopping_rule_violations(m, v, s);
            let detail = match bad.first() {
                None => format!("F(I) <= 1 < F(parent) on all {} members", s.len()),
                Some(w) => format!("{}: F = {}, F(parent) = {}", w.interval, w.f, w.f_parent),
            };
            Ok((bad.is_empty(), detail))
        });
        r.constant("section.c0", s.c0);
    }
    built
}

/// Rounding allowance on `‖K_t f‖₁ ≤ ‖f‖₁`; with `V = 0` on the support both sides agree
/// up to the last few bits.
const L1_SLACK: f64 = 1e-14;

fn bump(c: f64, w: f64) -> impl Fn(f64) -> f64 + Sync {
    move |x| (1.0 - ((x - c) / w).powi(2)).max(0.0).powi(2)
}

pub fn semigroup(cfg: &RunConfig, r: &mut Report) {
    let (m, v) = (&cfg.measure, &cfg.potential);
    let grid = match Grid::build(m, cfg.grid, &v.breakpoints()) {
        Ok(g) => g,
        Err(err) => return r.fail("semigroup", "grid", e(err)),
    };
    let scheme = SplittingScheme::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (t_lo, t_hi) = (cfg.tgrid.t_min.ln(), cfg.tgrid.t_max.ln());
    let w = cfg.window;

    let mut table = Table::new(
        "semigroup_domination.csv",
        &["case", "t", "center", "width", "l1_in", "l1_out", "min_value", "excess_over_steps", "excess_over_heat_apply"],
    );
    let mut worst_heat = 0.0f64;
    r.check("semigroup", "domination", || {
        let prop = Propagator::new(grid.clone(), v).map_err(e)?;
        let mut first_bad = None;
        for case in 0..20 {
            let t = rng.random_range(t_lo..=t_hi).exp();
            let c = rng.random_range(w.lo()..w.hi());
            let width = rng.random_range(0.05..0.5) * w.len();
            let f = GridFunction::from_fn(grid.clone(), bump(c, width));
            let k = schrodinger_apply(v, t, &f, &scheme).map_err(e)?;
            let heat = heat_apply(t, &f).map_err(e)?;
            let free = match v.as_constant() {
                Some(_) => heat.clone(),
                None => prop.evolve_free(&f, t, scheme.steps(t)).map_err(e)?,
            };
            let excess = |g: &GridFunction| max_of(k.values().iter().zip(g.values()).map(|(a, b)| a - b));
            let (over_steps, over_heat) = (excess(&free), excess(&heat));
            let low = k.values().iter().copied().fold(f64::INFINITY, f64::min);
            worst_heat = worst_heat.max(over_heat);
            let ok = low >= 0.0 && over_steps <= 0.0 && k.l1_norm() <= f.l1_norm() * (1.0 + L1_SLACK);
            if !ok && first_bad.is_none() {
                first_bad = Some(case);
            }
            table.push(row![case, t, c, width, f.l1_norm(), k.l1_norm(), low, over_steps, over_heat]);
        }
        let detail = match first_bad {
            None => format!("0 <= K f <= free steps and L1 contraction in 20 cases; excess over one-step heat_apply up to {worst_heat:e}"),
            Some(case) => format!("case {case} breaks positivity, domination or contraction"),
        };
        Ok((first_bad.is_none(), detail))
    });
    r.constant("semigroup.excess_over_heat_apply", worst_heat);
    r.tables.push(table);

    let t = (0.5 * cfg.tgrid.t_max).min(1.0);
    let (n_paths, n_steps) = (20_000, 100);
    let bound_grid = 2.0 * cfg.tol("grid");
    let mut table = Table::new(
        "semigroup_mc.csv",
        &["x0", "t", "mc_mean", "mc_stderr", "grid_value", "gap", "bound", "seed", "n_paths", "n_steps"],
    );
    r.check("semigroup", "monte_carlo", || {
        let fine = SplittingScheme::new(64.0, 4).map_err(e)?;
        let mut worst = f64::NEG_INFINITY;
        for q in [0.25, 0.5, 0.75] {
            let x0 = w.lo() + q * w.len();
            let f = move |x: f64| (-(x - x0).powi(2)).exp();
            let mc = feynman_kac(m, v, t, x0, &f, n_paths, n_steps, cfg.seed).map_err(e)?;
            let value = schrodinger_apply(v, t, &GridFunction::from_fn(grid.clone(), f), &fine)
                .map_err(e)?
                .interpolate(x0);
            let gap = (mc.mean - value).abs();
            let bound = cfg.tol("mc_sigma") * mc.stderr + bound_grid;
            worst = worst.max(gap / bound);
            table.push(row![x0, t, mc.mean, mc.stderr, value, gap, bound, cfg.seed, n_paths, n_steps]);
        }
        Ok((worst <= 1.0, format!("largest gap is {worst:.3} of its bound")))
    });
    r.tables.push(table);

    let mut table = Table::new(
        "semigroup_perturbation.csv",
        &["x", "y", "t", "steps", "lhs", "rhs", "residual", "tolerance"],
    );
    r.check("semigroup", "perturbation", || {
        let mut worst = 0.0f64;
        for (qx, qy) in [(0.3, 0.5), (0.5, 0.7), (0.2, 0.8)] {
            let (i, j) = (grid.nearest_node(w.lo() + qx * w.len()), grid.nearest_node(w.lo() + qy * w.len()));
            let a = perturbation_residual(&grid, v, t, i, j, 16).map_err(e)?;
            let b = perturbation_residual(&grid, v, t, i, j, 32).map_err(e)?;
            let tol = (a.lhs - b.lhs).abs() + (a.rhs - b.rhs).abs() + (b.p - b.p_direct).abs();
            if b.residual > 0.0 {
                worst = worst.max(b.residual / tol);
            }
            table.push(row![b.x, b.y, t, b.steps, b.lhs, b.rhs, b.residual, tol]);
        }
        let limit = cfg.tol("perturbation");
        Ok((worst < limit, format!("largest residual is {worst:.3} quadrature estimates (limit {limit})")))
    });
    r.tables.push(table);
}

/// A grid resolving every member of `s`, reaching `reach √(2 τ²)` past the window for the
/// largest member.
fn section_grid(cfg: &RunConfig, s: &ProperSection) -> Result<Arc<Grid>, String> {
    let longest = s.iter().map(|d| d.len()).fold(0.0, f64::max);
    let x_max = cfg.grid.x_max.max(cfg.window.hi() + 10.0 * 2f64.sqrt() * longest);
    let breaks: Vec<f64> = s.iter().flat_map(|d| [d.interval().lo(), d.interval().hi()]).collect();
    let spec = GridSpec::new(cfg.grid.cells, x_max, cfg.grid.ratio).map_err(e)?;
    Grid::build(&cfg.measure, spec, &breaks).map_err(e)
}

pub fn hardy(cfg: &RunConfig, r: &mut Report, s: &ProperSection) {
    let grid = match section_grid(cfg, s) {
        Ok(g) => g,
        Err(err) => return r.fail("hardy", "grid", err),
    };
    let members: Vec<Interval> = if s.len() <= 16 {
        s.iter().map(|d| d.interval()).collect()
    } else {
        sample_intervals(s, 16)
    };
    let scheme = SplittingScheme::default();
    let host = |interval: Interval| Host { interval, beta: s.beta };

    let mut table = Table::new("hardy_local.csv", &["lo", "hi", "norm", "norm_half", "norm_double"]);
    let mut stats = (0.0, 0.0);
    r.check("hardy", "local_atoms", || {
        let mut norms = Vec::new();
        for &i in &members {
            let atom = Atom::local(&grid, host(i)).map_err(e)?;
            let rep = hardy_norm_local(&Potential::zero(), atom.values(), i.len(), cfg.tgrid.per_octave, &scheme).map_err(e)?;
            table.push(row![i.lo(), i.hi(), rep.norm, rep.norm_half, rep.norm_double]);
            norms.push(rep.norm);
        }
        let max = max_of(norms.iter().copied());
        norms.sort_by(f64::total_cmp);
        let median = norms[norms.len() / 2];
        stats = (max, median);
        let limit = cfg.tol("atom_spread");
        Ok((max < limit * median, format!("max {max:.4}, median {median:.4} over {} atoms", norms.len())))
    });
    r.constant("hardy.local_norm_max", stats.0);
    r.constant("hardy.local_norm_median", stats.1);
    r.tables.push(table);

    let mut table = Table::new(
        "hardy_resupport.csv",
        &["host_lo", "host_hi", "support_lo", "support_hi", "terms", "certificate", "reconstruction_error"],
    );
    let mut worst_certificate = 0.0f64;
    r.check("hardy", "resupport", || {
        let mut ok = true;
        for &i in members.iter().take(8) {
            let h = host(i);
            let psi = Cutoff::for_host(&h).map_err(e)?;
            let support = Interval::of(i.center(), h.double_star().hi() + 0.5 * i.len());
            let len = i.len();
            let a = Atom::mu(&grid, &support, &move |x| (3.0 * x / len).cos()).map_err(e)?;
            let res = resupport_atom(&a, &h, &psi, psi.max_slope() * len).map_err(e)?;
            let rebuilt = res.synthesize(a.values()).map_err(e)?;
            let scale = a.values().sup_norm();
            let err = max_of(grid.nodes().iter().enumerate().map(|(k, &x)| {
                (rebuilt.values()[k] - psi.value(x) * a.values().values()[k]).abs() / scale
            }));
            let valid = res.terms.iter().all(|(_, b)| b.validate().is_ok());
            worst_certificate = worst_certificate.max(res.certificate());
            ok &= valid && err <= 1e-12 && res.certificate() <= cfg.tol("certificate");
            table.push(row![i.lo(), i.hi(), support.lo(), support.hi(), res.terms.len(), res.certificate(), err]);
        }
        Ok((ok, format!("largest certificate {worst_certificate:.4}")))
    });
    r.constant("hardy.certificate_max", worst_certificate);
    r.tables.push(table);
}

pub fn conditions(cfg: &RunConfig, r: &mut Report, s: &ProperSection) {
    let (m, v) = (&cfg.measure, &cfg.potential);
    let opts = DecayOptions::default();
    let slack = cfg.tol("fit");
    let members = sample_intervals(s, 4);
    let mut fits = Table::new(
        "conditions_fits.csv",
        &["condition", "lo", "hi", "point", "exponent", "target", "constant", "passed"],
    );

    let mut data = Table::new("conditions_d.csv", &["lo", "hi", "n", "mass"]);
    r.check("conditions", "decay_d", || {
        let mut worst = f64::NEG_INFINITY;
        for i in &members {
            let rep = check_condition_d(m, v, i, i.center(), 8, &opts).map_err(e)?;
            let passed = rep.exponent <= rep.target + slack;
            worst = worst.max(rep.exponent - rep.target);
            for &(n, mass) in &rep.data {
                data.push(row![i.lo(), i.hi(), n, mass]);
            }
            fits.push(row!["D", i.lo(), i.hi(), rep.point, rep.exponent, rep.target, rep.constant, passed]);
        }
        Ok((worst <= slack, format!("largest slope above target {worst:.4}")))
    });
    r.tables.push(data);

    let mut data = Table::new("conditions_k.csv", &["lo", "hi", "t_over_len2", "interaction"]);
    r.check("conditions", "decay_k", || {
        let mut worst = f64::NEG_INFINITY;
        for i in &members {
            let rep = check_condition_k(m, v, i, s.beta, &opts).map_err(e)?;
            let passed = rep.exponent >= rep.target - slack;
            worst = worst.max(rep.target - rep.exponent);
            for &(ratio, g) in &rep.data {
                data.push(row![i.lo(), i.hi(), ratio, g]);
            }
            fits.push(row!["K", i.lo(), i.hi(), rep.point, rep.exponent, rep.target, rep.constant, passed]);
        }
        Ok((worst <= slack, format!("largest shortfall below target {worst:.4}")))
    });
    r.tables.push(fits);

    let hosts: Vec<DyadicInterval> = {
        let mut h = vec![s.intervals[0], s.intervals[s.len() / 2]];
        h.dedup();
        h
    };
    let mut data = Table::new("conditions_theta.csv", &["host", "u", "theta", "phi_z"]);
    r.check("conditions", "superharmonic", || {
        let mut ok = true;
        let mut worst = f64::NEG_INFINITY;
        for host in &hosts {
            let p = find_balanced_j(m, v, host).map_err(e)?;
            let i = host.interval();
            let scale = i.len() * i.len();
            let times = TimeGrid::octave_uniform(1e-3 * scale, 100.0 * scale, 4).map_err(e)?;
            let grid = profile_grid(&p, i.center(), 100.0 * scale, 10.0).map_err(e)?;
            let rep = check_superharmonic(&grid, &p, i.center(), &times, &profile_scheme(&p)).map_err(e)?;
            ok &= rep.passed();
            worst = worst.max(rep.worst_increase).max(rep.worst_excess);
            for &(u, th) in &rep.theta {
                data.push(row![host, u, th, rep.phi_z]);
            }
        }
        Ok((ok, format!("largest relative increase or excess {worst:e} over {} profiles", hosts.len())))
    });
    r.tables.push(data);

    r.check("conditions", "weak_identity", || {
        let host = s.intervals[0];
        let p = find_balanced_j(m, v, &host).map_err(e)?;
        let hi = p.j.hi();
        let mut tests = vec![TestFunction::bump(0.5 * hi, 2.0 * hi)];
        if host.is_left() {
            tests.push(TestFunction::plateau(0.3 * hi, 1.5 * hi));
        }
        let mut worst = 0.0f64;
        for psi in &tests {
            let rep = phi_equation_residual(&p, psi);
            let scale = rep.stiffness.abs().max(rep.load.abs()).max(rep.boundary.abs());
            worst = worst.max(rep.residual / scale);
        }
        Ok((worst < cfg.tol("weak"), format!("largest relative residual {worst:e} over {} test functions", tests.len())))
    });
}
