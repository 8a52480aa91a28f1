use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sim::pair_test;
use super::{in_pool, AuditOptions, AuditRow, Mode, Retained, TestRecord};
use crate::error::{Error, Result};
use crate::ingest::Catalog;
use crate::series::TimeSeries;
use crate::tscore::{diagnose, summarize_diagnostics, KendallResult, SeriesDiagnostics};

/// Label of the row aggregating every dataset.
pub const TOTAL_LABEL: &str = "all";

/// Errors that mean "not enough usable data" rather than a failure.
fn is_skip(e: &Error) -> bool {
    matches!(
        e,
        Error::Alignment { .. } | Error::Degenerate(_) | Error::SingularDesign(_)
    )
}

fn skip_or(r: Result<KendallResult>) -> Result<Option<KendallResult>> {
    match r {
        Ok(k) => Ok(Some(k)),
        Err(e) if is_skip(&e) => Ok(None),
        Err(e) => Err(e),
    }
}

struct Outcome {
    dataset: String,
    record: Option<TestRecord>,
    diag: Option<SeriesDiagnostics>,
}

/// Correlates every catalog series with `target`. Returns one row per
/// dataset, in name order, followed by a total row. Series sharing fewer
/// than `min_overlap` years with the target (and covariates, in residual
/// mode) are counted in `n_skipped`.
pub fn run_catalog_audit(
    target: &TimeSeries,
    catalog: &Catalog,
    covariates: &[TimeSeries],
    opts: &AuditOptions,
) -> Result<Vec<AuditRow>> {
    opts.validate()?;
    if catalog.is_empty() {
        return Err(Error::input("catalog is empty"));
    }
    if opts.mode == Mode::OlsResidual && covariates.is_empty() {
        return Err(Error::input("ols_residual mode needs covariates"));
    }
    let entries: Vec<_> = catalog.iter().collect();
    let outcomes: Vec<Result<Outcome>> = in_pool(opts.workers, || {
        entries
            .par_iter()
            .map(|((dataset, entity), s)| {
                let k = skip_or(pair_test(target, s, covariates, opts, opts.min_overlap))?;
                Ok(Outcome {
                    dataset: dataset.clone(),
                    record: k.map(|k| TestRecord {
                        series: format!("{dataset}/{entity}"),
                        tau: k.tau,
                        p: k.p_two_sided,
                        n: k.n,
                    }),
                    diag: diagnose(s).ok(),
                })
            })
            .collect()
    })?;
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut start = 0;
    while start < outcomes.len() {
        let name = &outcomes[start].dataset;
        let end = start
            + outcomes[start..]
                .iter()
                .take_while(|o| &o.dataset == name)
                .count();
        if let Some(row) = aggregate(name, &outcomes[start..end], opts)? {
            rows.push(row);
        }
        start = end;
    }
    match aggregate(TOTAL_LABEL, &outcomes, opts)? {
        Some(total) => rows.push(total),
        None => {
            return Err(Error::Alignment {
                common: 0,
                required: opts.min_overlap,
            })
        }
    }
    Ok(rows)
}

fn aggregate(label: &str, group: &[Outcome], opts: &AuditOptions) -> Result<Option<AuditRow>> {
    let records: Vec<TestRecord> = group.iter().filter_map(|o| o.record.clone()).collect();
    let skipped = group.len() - records.len();
    if records.is_empty() {
        log::warn!("{label}: all {skipped} series skipped");
        return Ok(None);
    }
    let diags: Vec<SeriesDiagnostics> = group.iter().filter_map(|o| o.diag).collect();
    let summary = if diags.is_empty() {
        None
    } else {
        Some(summarize_diagnostics(&diags, label)?)
    };
    let results = Retained::collect(records, opts.memory_cap)?;
    AuditRow::from_results(label, opts, results, skipped, summary).map(Some)
}

/// How many of a set of measures each catalog series is significantly
/// associated with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSummary {
    pub measures: Vec<String>,
    pub alpha: f64,
    pub mode: super::Mode,
    /// Series tested against every measure.
    pub n_series: usize,
    /// Series lacking overlap with at least one measure.
    pub n_skipped: usize,
    /// `counts[k]` series were significant with exactly `k` measures.
    pub counts: Vec<usize>,
}

impl JointSummary {
    /// Share of tested series significant with at least `k` measures.
    pub fn share_at_least(&self, k: usize) -> f64 {
        if self.n_series == 0 {
            return 0.0;
        }
        let hits: usize = self.counts.iter().skip(k).sum();
        hits as f64 / self.n_series as f64
    }

    /// Share significant with every measure.
    pub fn share_all(&self) -> f64 {
        self.share_at_least(self.measures.len())
    }
}

/// Tests every catalog series against each of `measures`, in the same way as
/// the per-target audit, and tallies the number of significant associations
/// per series.
pub fn run_joint_audit(
    measures: &[TimeSeries],
    catalog: &Catalog,
    covariates: &[TimeSeries],
    opts: &AuditOptions,
) -> Result<JointSummary> {
    opts.validate()?;
    if measures.is_empty() {
        return Err(Error::input("no measures given"));
    }
    let entries: Vec<&TimeSeries> = catalog.iter().map(|(_, s)| s).collect();
    let tallies: Vec<Result<Option<usize>>> = in_pool(opts.workers, || {
        entries
            .par_iter()
            .map(|s| {
                let mut hits = 0;
                for m in measures {
                    match skip_or(pair_test(m, s, covariates, opts, opts.min_overlap))? {
                        Some(k) if k.p_two_sided < opts.alpha => hits += 1,
                        Some(_) => {}
                        None => return Ok(None),
                    }
                }
                Ok(Some(hits))
            })
            .collect()
    })?;
    let mut counts = vec![0; measures.len() + 1];
    let mut n_skipped = 0;
    for t in tallies {
        match t? {
            Some(k) => counts[k] += 1,
            None => n_skipped += 1,
        }
    }
    Ok(JointSummary {
        measures: measures.iter().map(|m| m.id().to_string()).collect(),
        alpha: opts.alpha,
        mode: opts.mode,
        n_series: counts.iter().sum(),
        n_skipped,
        counts,
    })
}
