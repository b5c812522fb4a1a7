//! Flags and config files, validated into a [`RunConfig`].

use bessel_hardy::grid::GridSpec;
use bessel_hardy::measure::{Interval, Potential, WeightedMeasure};
use clap::Args;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

/// Tolerances and their defaults; `--tol NAME=VALUE` overrides any of them.
pub const TOLERANCES: [(&str, f64); 8] = [
    // |∫P_t(·,y)dμ - 1|
    ("mass", 1e-8),
    // standard errors allowed between Monte Carlo and the grid
    ("mc_sigma", 3.0),
    // grid discretisation error in the Monte Carlo comparison
    ("grid", 5e-4),
    // perturbation residual, in multiples of the combined quadrature estimate
    ("perturbation", 5.0),
    // largest local atomic norm over the median
    ("atom_spread", 10.0),
    // Σ|λ_j| of a re-supporting decomposition
    ("certificate", 10.0),
    // slack on fitted decay exponents
    ("fit", 0.1),
    // weak-identity residual, relative to its largest term
    ("weak", 1e-10),
];

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Exponent of the measure x^α dx.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Potential in the file format, with `;` between directives, e.g. "piece 0 8 1; power 1 0.5".
    #[arg(long, global = true)]
    pub potential: Option<String>,
    /// File in the potential format.
    #[arg(long, global = true)]
    pub potential_file: Option<PathBuf>,
    /// Window lo:hi.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Spatial grid cells:x_max:ratio.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Time grid t_min:t_max:per_octave.
    #[arg(long, global = true)]
    pub tgrid: Option<String>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tolerance override NAME=VALUE (repeatable).
    #[arg(long = "tol", global = true)]
    pub tol: Vec<String>,
    /// File of `key = value` lines using the flag names; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Usage { flag: &'static str, message: String },
    File { path: PathBuf, line: usize, message: String },
    Library(bessel_hardy::Error),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage { flag, message } => write!(f, "--{flag}: {message}"),
            Self::File { path, line, message } => write!(f, "{}:{line}: {message}", path.display()),
            Self::Library(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn usage(flag: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Usage {
        flag,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub per_octave: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub measure: WeightedMeasure,
    /// Canonical text of the potential.
    pub potential_text: String,
    pub potential: Potential,
    pub window: Interval,
    pub grid: GridSpec,
    pub tgrid: TimeSpec,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    /// Flags that reproduce this config.
    pub fn echo(&self) -> Vec<String> {
        let mut args = vec![
            "--alpha".to_string(),
            self.alpha.to_string(),
            "--potential".into(),
            self.potential_text.trim_end().replace('\n', "; "),
            "--window".into(),
            format!("{}:{}", self.window.lo(), self.window.hi()),
            "--grid".into(),
            format!("{}:{}:{}", self.grid.cells, self.grid.x_max, self.grid.ratio),
            "--tgrid".into(),
            format!("{}:{}:{}", self.tgrid.t_min, self.tgrid.t_max, self.tgrid.per_octave),
            "--seed".into(),
            self.seed.to_string(),
        ];
        for (k, v) in &self.tolerances {
            args.push("--tol".into());
            args.push(format!("{k}={v}"));
        }
        args
    }
}

fn number(flag: &'static str, text: &str) -> Result<f64, ConfigError> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| usage(flag, format!("not a number: `{text}`")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(usage(flag, "must be finite"))
    }
}

fn fields<const N: usize>(flag: &'static str, text: &str, shape: &str) -> Result<[String; N], ConfigError> {
    let parts: Vec<String> = text.split(':').map(str::to_string).collect();
    parts
        .try_into()
        .map_err(|_| usage(flag, format!("expected {shape}, got `{text}`")))
}

/// Merge `key = value` lines from a config file under the command-line flags.
fn merge_file(flags: &Flags, path: &Path) -> Result<Flags, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::File {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    let mut merged = flags.clone();
    let mut file_tols = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let bad = |message: String| ConfigError::File {
            path: path.to_path_buf(),
            line: idx + 1,
            message,
        };
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim().to_string()))
            .ok_or_else(|| bad(format!("expected `key = value`, got `{content}`")))?;
        let slot = match key {
            "alpha" => &mut merged.alpha,
            "potential" => &mut merged.potential,
            "window" => &mut merged.window,
            "grid" => &mut merged.grid,
            "tgrid" => &mut merged.tgrid,
            "seed" => &mut merged.seed,
            "potential-file" => {
                if merged.potential_file.is_none() {
                    let p = PathBuf::from(&value);
                    let base = path.parent().unwrap_or(Path::new("."));
                    merged.potential_file = Some(if p.is_relative() { base.join(p) } else { p });
                }
                continue;
            }
            "out" => {
                merged.out.get_or_insert_with(|| PathBuf::from(&value));
                continue;
            }
            "tol" => {
                file_tols.push(value);
                continue;
            }
            other => return Err(bad(format!("unknown key `{other}`"))),
        };
        slot.get_or_insert(value);
    }
    // command-line overrides come last and win
    file_tols.extend(merged.tol);
    merged.tol = file_tols;
    Ok(merged)
}

pub fn parse_config(flags: &Flags) -> Result<RunConfig, ConfigError> {
    let flags = match &flags.config {
        Some(path) => merge_file(flags, path)?,
        None => flags.clone(),
    };

    let alpha = number("alpha", flags.alpha.as_deref().unwrap_or("0.5"))?;
    if alpha <= 0.0 {
        return Err(usage("alpha", format!("must be positive, got {alpha}")));
    }
    let measure = WeightedMeasure::new(alpha).map_err(ConfigError::Library)?;

    let potential = match (&flags.potential, &flags.potential_file) {
        (Some(_), Some(_)) => return Err(usage("potential", "give either --potential or --potential-file")),
        (Some(inline), None) => {
            let text = inline.replace(';', "\n");
            Potential::parse(&text, &measure).map_err(|e| match e {
                bessel_hardy::Error::Parse { message, .. } => usage("potential", message),
                other => ConfigError::Library(other),
            })?
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage("potential-file", format!("{}: {e}", path.display())))?;
            Potential::parse(&text, &measure).map_err(|e| match e {
                bessel_hardy::Error::Parse { line, message } => ConfigError::File {
                    path: path.clone(),
                    line,
                    message,
                },
                other => ConfigError::Library(other),
            })?
        }
        (None, None) => return Err(usage("potential", "a potential is required (or --potential-file)")),
    };

    let [lo, hi] = fields::<2>("window", flags.window.as_deref().unwrap_or("0:8"), "lo:hi")?;
    let (lo, hi) = (number("window", &lo)?, number("window", &hi)?);
    if !(0.0 <= lo && lo < hi) {
        return Err(usage("window", format!("need 0 <= lo < hi, got {lo}:{hi}")));
    }
    let window = Interval::of(lo, hi);

    let default_grid = format!("400:{}:1.05", hi + 12.0);
    let [cells, x_max, ratio] = fields::<3>("grid", flags.grid.as_deref().unwrap_or(&default_grid), "cells:x_max:ratio")?;
    let cells = number("grid", &cells)?;
    if cells.fract() != 0.0 || cells < 1.0 {
        return Err(usage("grid", format!("cell count must be a positive integer, got {cells}")));
    }
    let x_max = number("grid", &x_max)?;
    if x_max <= hi {
        return Err(usage("grid", format!("x_max = {x_max} must exceed the window end {hi}")));
    }
    let grid = GridSpec::new(cells as usize, x_max, number("grid", &ratio)?).map_err(|e| usage("grid", e.to_string()))?;

    let [t_min, t_max, per_octave] = fields::<3>("tgrid", flags.tgrid.as_deref().unwrap_or("0.01:1:8"), "t_min:t_max:per_octave")?;
    let (t_min, t_max, per_octave) = (number("tgrid", &t_min)?, number("tgrid", &t_max)?, number("tgrid", &per_octave)?);
    if !(0.0 < t_min && t_min < t_max) || per_octave < 1.0 || per_octave.fract() != 0.0 {
        return Err(usage("tgrid", "need 0 < t_min < t_max and a positive integer per_octave"));
    }
    let tgrid = TimeSpec {
        t_min,
        t_max,
        per_octave: per_octave as usize,
    };

    let seed = match flags.seed.as_deref() {
        None => 1,
        Some(s) => s.trim().parse().map_err(|_| usage("seed", format!("not an unsigned integer: `{s}`")))?,
    };

    let mut tolerances: BTreeMap<String, f64> = TOLERANCES.iter().map(|&(k, v)| (k.to_string(), v)).collect();
    for item in &flags.tol {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| usage("tol", format!("expected NAME=VALUE, got `{item}`")))?;
        let slot = tolerances
            .get_mut(name.trim())
            .ok_or_else(|| usage("tol", format!("unknown tolerance `{name}`")))?;
        let v = number("tol", value)?;
        if v <= 0.0 {
            return Err(usage("tol", format!("`{name}` must be positive")));
        }
        *slot = v;
    }

    Ok(RunConfig {
        alpha,
        measure,
        potential_text: potential.to_text(),
        potential,
        window,
        grid,
        tgrid,
        seed,
        tolerances,
        out: flags.out.unwrap_or_else(|| PathBuf::from("bhardy-out")),
    })
}
