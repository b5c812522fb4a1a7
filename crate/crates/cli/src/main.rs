//! `bhardy`: run the library's checks and write CSV tables plus a JSON summary.

mod config;
mod report;
mod suites;

use clap::{Parser, Subcommand};
use config::{parse_config, Flags};
use report::Report;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "bhardy", version, about = "Numerical checks for Bessel heat kernels, sections and local Hardy atoms")]
struct Cli {
    #[command(subcommand)]
    suite: Suite,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Suite {
    /// Kernel normalisation and Gaussian bound constants.
    Kernel,
    /// The proper section of the potential over the window.
    Section,
    /// Domination, Monte Carlo cross-check and the perturbation identity.
    Semigroup,
    /// Local atomic norms and re-supporting decompositions over the section.
    Hardy,
    /// Decay conditions (D) and (K) and the superharmonic profile.
    Conditions,
    /// Every suite in turn.
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Self::Kernel => "kernel",
            Self::Section => "section",
            Self::Semigroup => "semigroup",
            Self::Hardy => "hardy",
            Self::Conditions => "conditions",
            Self::All => "all",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match parse_config(&cli.flags) {
        Ok(c) => c,
        Err(err) => {
            eprintln!("bhardy: {err}");
            return ExitCode::from(2);
        }
    };
    let mut r = Report::default();
    let suite = cli.suite;
    if matches!(suite, Suite::Kernel | Suite::All) {
        suites::kernel(&cfg, &mut r);
    }
    let section = match suite {
        Suite::Section | Suite::Hardy | Suite::Conditions | Suite::All => Some(suites::section(&cfg, &mut r)),
        _ => None,
    };
    if matches!(suite, Suite::Semigroup | Suite::All) {
        suites::semigroup(&cfg, &mut r);
    }
    for (wanted, name) in [(Suite::Hardy, "hardy"), (Suite::Conditions, "conditions")] {
        if !(suite == wanted || suite == Suite::All) {
            continue;
        }
        match section.as_ref().expect("section built for this suite") {
            Ok(s) if name == "hardy" => suites::hardy(&cfg, &mut r, s),
            Ok(s) => suites::conditions(&cfg, &mut r, s),
            Err(err) => r.fail(name, "section", format!("no section: {err}")),
        }
    }
    if let Err(err) = r.write(&cfg, suite.name(), &cfg.out) {
        eprintln!("bhardy: writing {}: {err}", cfg.out.display());
        return ExitCode::from(2);
    }
    let failed = r.checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed; tables in {}", r.checks.len(), cfg.out.display());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
