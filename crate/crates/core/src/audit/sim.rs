use rayon::prelude::*;

use super::{in_pool, AuditOptions, AuditRow, Mode, Retained, TestRecord};
use crate::detrend::residual_correlation_with;
use crate::error::{Error, Result};
use crate::ingest::align;
use crate::series::{common_years, TimeSeries};
use crate::simgen::{gen_series, GeneratorSpec};
use crate::tscore::{diagnose, kendall_tau_with, summarize_diagnostics, KendallResult};

/// Correlates `s` with `target` in the configured mode, over at least
/// `min_overlap` common years.
pub(crate) fn pair_test(
    target: &TimeSeries,
    s: &TimeSeries,
    covariates: &[TimeSeries],
    opts: &AuditOptions,
    min_overlap: usize,
) -> Result<KendallResult> {
    match opts.mode {
        Mode::Raw => {
            let pairs = align(target, s, min_overlap)?;
            kendall_tau_with(&pairs.a, &pairs.b, &opts.kendall)
        }
        Mode::OlsResidual => {
            let common = common_years([target, s].into_iter().chain(covariates)).len();
            if common < min_overlap {
                return Err(Error::Alignment {
                    common,
                    required: min_overlap,
                });
            }
            residual_correlation_with(target, s, covariates, &opts.kendall)
        }
    }
}

/// Correlates `count` generated series with `target` and aggregates the
/// significance rate and the batch's trend/dependence diagnostics.
///
/// Series `i` is always generated from the same derived seed, so results do
/// not depend on the worker count.
pub fn run_simulation_audit(
    target: &TimeSeries,
    spec: &GeneratorSpec,
    count: usize,
    covariates: &[TimeSeries],
    opts: &AuditOptions,
) -> Result<AuditRow> {
    opts.validate()?;
    spec.validate()?;
    if count == 0 {
        return Err(Error::input("count must be >= 1"));
    }
    if opts.mode == Mode::OlsResidual && covariates.is_empty() {
        return Err(Error::input("ols_residual mode needs covariates"));
    }

    let one = |i: u64| -> Result<(TestRecord, _)> {
        let s = gen_series(spec, i)?;
        let k = pair_test(target, &s, covariates, opts, 3)?;
        let record = TestRecord {
            series: s.id().to_string(),
            tau: k.tau,
            p: k.p_two_sided,
            n: k.n,
        };
        Ok((record, diagnose(&s)?))
    };
    let outcomes: Vec<Result<_>> = in_pool(opts.workers, || {
        (0..count as u64).into_par_iter().map(one).collect()
    })?;
    let (records, diags): (Vec<_>, Vec<_>) = outcomes
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();

    let label = spec.class.as_str();
    let summary = summarize_diagnostics(&diags, label)?;
    let results = Retained::collect(records, opts.memory_cap)?;
    AuditRow::from_results(label, opts, results, 0, Some(summary))
}
