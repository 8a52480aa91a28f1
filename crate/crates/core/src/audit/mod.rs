//! Experiment harness: simulation and catalog audits, the replication table,
//! dynamic-regression validation and report output.

mod catalog;
mod report;
mod retained;
mod sim;
mod table1;
mod validation;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use catalog::{run_catalog_audit, run_joint_audit, JointSummary};
pub use report::{emit_report, Report, ReportFormat, CSV_HEADER};
pub use retained::{Retained, TestRecord, DEFAULT_MEMORY_CAP};
pub use sim::run_simulation_audit;
pub use table1::{replicate_table1, ReplicationCell, Stars, Table1};
pub use validation::{run_dynreg_validation, Block, DynregRow, ValidationOptions};

use crate::error::{Error, Result};
use crate::tscore::{median, rate_of, DiagnosticSummary, KendallOptions};

/// Significance levels always reported alongside the chosen alpha.
pub const ALPHA_GRID: [f64; 3] = [0.05, 0.01, 0.005];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Kendall tau on the aligned levels.
    Raw,
    /// Kendall tau on residuals after regressing both series on year and
    /// covariates.
    OlsResidual,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Raw => "raw",
            Mode::OlsResidual => "ols_residual",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Mode::Raw),
            "ols_residual" => Ok(Mode::OlsResidual),
            other => Err(Error::input(format!(
                "unknown mode {other:?} (expected raw or ols_residual)"
            ))),
        }
    }
}

/// Settings shared by the audits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    pub alpha: f64,
    pub mode: Mode,
    pub kendall: KendallOptions,
    /// Minimum common years for a catalog series to be tested.
    pub min_overlap: usize,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Per-test records kept in memory before spilling to a temp file.
    pub memory_cap: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            alpha: 0.05,
            mode: Mode::Raw,
            kendall: KendallOptions::default(),
            min_overlap: crate::ingest::DEFAULT_MIN_OVERLAP,
            workers: None,
            memory_cap: DEFAULT_MEMORY_CAP,
        }
    }
}

impl AuditOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::input(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.min_overlap < 3 {
            return Err(Error::input("min_overlap must be >= 3"));
        }
        if self.workers == Some(0) {
            return Err(Error::input("workers must be >= 1"));
        }
        Ok(())
    }
}

/// Runs `f` on a pool of `workers` threads, or on the global pool.
pub(crate) fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::input(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Aggregated results for one class or dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub label: String,
    pub mode: Mode,
    pub alpha: f64,
    pub n_tests: usize,
    /// Series not tested (too few common years, or constant).
    pub n_skipped: usize,
    pub pct_significant: f64,
    /// Rates at 0.05, 0.01 and 0.005.
    pub pct_at: [f64; 3],
    pub median_tau: f64,
    pub diagnostics: Option<DiagnosticSummary>,
    #[serde(skip)]
    pub results: Retained,
}

impl AuditRow {
    pub(crate) fn from_results(
        label: impl Into<String>,
        opts: &AuditOptions,
        results: Retained,
        n_skipped: usize,
        diagnostics: Option<DiagnosticSummary>,
    ) -> Result<Self> {
        let label = label.into();
        let records = results.records()?;
        if records.is_empty() {
            return Err(Error::input(format!(
                "no series could be tested for {label}"
            )));
        }
        let p = || records.iter().map(|r| r.p);
        let taus: Vec<f64> = records.iter().map(|r| r.tau).collect();
        let mut pct_at = [0.0; 3];
        for (slot, a) in pct_at.iter_mut().zip(ALPHA_GRID) {
            *slot = rate_of(p(), a)?;
        }
        Ok(AuditRow {
            label,
            mode: opts.mode,
            alpha: opts.alpha,
            n_tests: records.len(),
            n_skipped,
            pct_significant: rate_of(p(), opts.alpha)?,
            pct_at,
            median_tau: median(&taus).unwrap_or(0.0),
            diagnostics,
            results,
        })
    }
}
