//! Experiment orchestration: configuration, resolution budgeting, named experiments
//! and file output.

mod budget;
mod config;
mod experiments;
pub mod frozen;

use std::fmt;
use std::path::PathBuf;

pub use budget::{resolution_budget, ResolutionBudget};
pub use config::{Experiment, ExperimentConfig, GridChoice, RuleKind};

use crate::error::{Error, Result};

/// Process exit status of an experiment run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Failure = 1,
    Regression = 2,
    Unresolved = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Plain decimals in `[1e-3, 1e6)`, scientific notation elsewhere.
fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-3..1e6).contains(&a) || !a.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// One invariant or frozen-regression comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// Human-readable acceptance region.
    pub target: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            target: format!("<= {}", num(bound)),
            pass: measured <= bound,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            target: format!(">= {}", num(bound)),
            pass: measured >= bound,
        }
    }

    pub fn range(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            target: format!("in [{}, {}]", num(lo), num(hi)),
            pass: (lo..=hi).contains(&measured),
        }
    }

    /// Frozen value with the allowed relative drift.
    pub fn frozen(name: impl Into<String>, measured: f64, frozen: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            target: format!("{} ± {}%", num(frozen), frozen::DRIFT * 100.0),
            pass: frozen::within_drift(measured, frozen),
        }
    }

    pub fn near(name: impl Into<String>, measured: f64, expected: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            target: format!("{} ± {}", num(expected), num(tol)),
            pass: (measured - expected).abs() <= tol,
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            measured: if ok { 1.0 } else { 0.0 },
            target: "holds".into(),
            pass: ok,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {} (want {})", self.name, num(self.measured), self.target)
    }
}

/// Result of [`run_experiment`]: checks, written files and remarks.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub experiment: Experiment,
    pub n: Option<usize>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<PathBuf>,
    pub notes: Vec<String>,
    /// No step of the schedule could be resolved.
    pub unresolved: bool,
}

impl Outcome {
    fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            n: None,
            checks: Vec::new(),
            artifacts: Vec::new(),
            notes: Vec::new(),
            unresolved: false,
        }
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn status(&self) -> ExitStatus {
        if self.failed().next().is_some() {
            ExitStatus::Regression
        } else if self.unresolved {
            ExitStatus::Unresolved
        } else {
            ExitStatus::Success
        }
    }
}

/// Runs the configured experiment on a pool of `config.workers` threads and writes
/// its artifacts below `config.out`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Outcome> {
    config.validate()?;
    std::fs::create_dir_all(&config.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Setting(format!("worker pool: {e}")))?;
    pool.install(|| match config.experiment {
        Experiment::TransportGrowth => experiments::transport_growth(config),
        Experiment::DissipationSweep => experiments::dissipation_sweep(config),
        Experiment::FbVerify => experiments::fb_verify(config),
        Experiment::Figure1Frames => experiments::figure1_frames(config),
        Experiment::RegularityTheorem2 => experiments::regularity_theorem2(config),
        Experiment::Schedule => experiments::schedule(config),
    })
}
