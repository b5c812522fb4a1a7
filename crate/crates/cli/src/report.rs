//! Checks, CSV tables and the JSON summary.

use crate::config::RunConfig;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    /// The witness on failure, a short summary otherwise.
    pub detail: String,
    pub seconds: f64,
}

/// A CSV artifact, kept in memory until the run ends.
#[derive(Debug, Clone)]
pub struct Table {
    pub file: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, header: &[&str]) -> Self {
        Self {
            file: file.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

/// Shorthand for a CSV row of displayable values.
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($x.to_string()),*] };
}

#[derive(Debug, Default)]
pub struct Report {
    pub checks: Vec<Check>,
    pub constants: BTreeMap<String, f64>,
    pub tables: Vec<Table>,
}

impl Report {
    /// Time `f` and record its verdict.
    pub fn check(&mut self, suite: &'static str, name: &str, f: impl FnOnce() -> Result<(bool, String), String>) {
        let start = Instant::now();
        let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        let c = Check {
            suite,
            name: name.to_string(),
            passed,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        };
        println!("{} {}.{}: {}", if c.passed { "PASS" } else { "FAIL" }, c.suite, c.name, c.detail);
        self.checks.push(c);
    }

    pub fn fail(&mut self, suite: &'static str, name: &str, detail: String) {
        self.check(suite, name, || Ok((false, detail)));
    }

    pub fn constant(&mut self, name: &str, value: f64) {
        self.constants.insert(name.to_string(), value);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Write every table and `summary.json` into the output directory.
    pub fn write(&self, config: &RunConfig, suite: &str, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for t in &self.tables {
            std::fs::write(dir.join(&t.file), t.to_csv())?;
        }
        let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let summary = serde_json::json!({
            "finished_unix": started,
            "suite": suite,
            "config": config.echo(),
            "passed": self.passed(),
            "failures": self.checks.iter().filter(|c| !c.passed).count(),
            "checks": self.checks,
            "constants": self.constants,
            "tables": self.tables.iter().map(|t| &t.file).collect::<Vec<_>>(),
        });
        std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")
    }
}
