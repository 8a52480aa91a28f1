//! Stepwise AICc search over ARIMA orders.
//!
//! 1. `d` is chosen by repeated level-KPSS tests on the response alone,
//!    differencing while stationarity is rejected, up to `max_d`. Testing
//!    OLS residuals on trending regressors instead removes most of a random
//!    walk's trend and leaves it undifferenced.
//! 2. The starting set `(2,d,2)`, `(0,d,0)`, `(1,d,0)`, `(0,d,1)` is fitted.
//! 3. From the current best, every neighbour that changes `p`, `q` or both by
//!    one is fitted; the search moves to the best neighbour while it lowers
//!    AICc and stops at a local minimum.
//!
//! A fitted candidate with an MA root of modulus below `min_root` (1.01 by
//! default) is recorded in the trace without an AICc and never selected.
//! AR roots are not checked: when KPSS leaves a persistent error series
//! undifferenced, a near-unit AR root is the right model for it.
//!
//! Candidates of one round are fitted in parallel; the trace is kept in
//! candidate order, so it does not depend on scheduling.

use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::arma::{difference, min_root_modulus, ArimaOrder, MAX_D, MAX_P, MAX_Q};
use super::fit::{fit_arima_with, ArimaFit, FitOptions, Regressors};
use super::kpss::{kpss_test, KpssTrend};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct AutoArimaOptions {
    pub max_p: usize,
    pub max_q: usize,
    pub max_d: usize,
    /// Upper bound on fitted models.
    pub max_models: usize,
    /// Smallest admissible MA root modulus.
    pub min_root: f64,
    pub parallel: bool,
    pub fit: FitOptions,
}

impl Default for AutoArimaOptions {
    fn default() -> Self {
        AutoArimaOptions {
            max_p: MAX_P,
            max_q: MAX_Q,
            max_d: MAX_D,
            max_models: 94,
            min_root: 1.01,
            parallel: true,
            fit: FitOptions::default(),
        }
    }
}

/// One fitted (or failed) candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub order: ArimaOrder,
    pub aicc: Option<f64>,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoArima {
    pub best: ArimaFit,
    pub trace: Vec<TraceEntry>,
    /// KPSS statistics computed while choosing `d`, in order.
    pub kpss_statistics: Vec<f64>,
}

impl AutoArima {
    /// Writes the search trace as JSON lines.
    pub fn write_trace<W: Write>(&self, mut out: W) -> Result<()> {
        for entry in &self.trace {
            serde_json::to_writer(&mut out, entry)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Chooses the number of differences by repeated KPSS tests on `y`.
pub fn choose_d(y: &[f64], max_d: usize) -> Result<(usize, Vec<f64>)> {
    let mut x = y.to_vec();
    let mut stats = Vec::new();
    let mut d = 0;
    while d < max_d {
        let test = match kpss_test(&x, KpssTrend::Level) {
            Ok(t) => t,
            Err(Error::Degenerate(_)) => break,
            Err(e) => return Err(e),
        };
        stats.push(test.statistic);
        if !test.rejects_stationarity() {
            break;
        }
        x = difference(&x, 1)?;
        d += 1;
    }
    Ok((d, stats))
}

fn smallest_ma_root(fit: &ArimaFit) -> f64 {
    let neg_ma: Vec<f64> = fit.ma.iter().map(|b| -b).collect();
    min_root_modulus(&neg_ma)
}

pub fn auto_arima(y: &[f64], xreg: &Regressors) -> Result<AutoArima> {
    auto_arima_with(y, xreg, &AutoArimaOptions::default())
}

pub fn auto_arima_with(y: &[f64], xreg: &Regressors, opts: &AutoArimaOptions) -> Result<AutoArima> {
    let (d, kpss_statistics) = choose_d(y, opts.max_d.min(MAX_D))?;
    let n_eff = y.len().saturating_sub(d);
    let fits_data = |p: usize, q: usize| n_eff > p + q + xreg.len() + 2;

    let mut visited: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut trace: Vec<TraceEntry> = Vec::new();
    let mut best: Option<ArimaFit> = None;

    let run_round = |candidates: Vec<(usize, usize)>,
                     visited: &mut BTreeSet<(usize, usize)>,
                     trace: &mut Vec<TraceEntry>,
                     best: &mut Option<ArimaFit>|
     -> bool {
        let fresh: Vec<ArimaOrder> = candidates
            .into_iter()
            .filter(|&(p, q)| {
                p <= opts.max_p.min(MAX_P) && q <= opts.max_q.min(MAX_Q) && fits_data(p, q)
            })
            .filter(|pq| visited.insert(*pq))
            .map(|(p, q)| ArimaOrder { p, d, q })
            .take(opts.max_models.saturating_sub(trace.len()))
            .collect();
        let fit_one = |order: &ArimaOrder| fit_arima_with(y, *order, xreg, &opts.fit);
        let results: Vec<Result<ArimaFit>> = if opts.parallel {
            fresh.par_iter().map(fit_one).collect()
        } else {
            fresh.iter().map(fit_one).collect()
        };
        let mut improved = false;
        for (order, result) in fresh.into_iter().zip(results) {
            match result {
                Ok(fit) if smallest_ma_root(&fit) < opts.min_root => trace.push(TraceEntry {
                    order,
                    aicc: None,
                    converged: fit.converged,
                    error: Some(format!(
                        "root modulus {:.4} below {}",
                        smallest_ma_root(&fit),
                        opts.min_root
                    )),
                }),
                Ok(fit) => {
                    trace.push(TraceEntry {
                        order,
                        aicc: Some(fit.aicc),
                        converged: fit.converged,
                        error: None,
                    });
                    let better = best.as_ref().is_none_or(|b| fit.aicc < b.aicc);
                    if better && fit.aicc.is_finite() {
                        *best = Some(fit);
                        improved = true;
                    }
                }
                Err(e) => trace.push(TraceEntry {
                    order,
                    aicc: None,
                    converged: false,
                    error: Some(e.to_string()),
                }),
            }
        }
        improved
    };

    run_round(
        vec![(2, 2), (0, 0), (1, 0), (0, 1)],
        &mut visited,
        &mut trace,
        &mut best,
    );

    while let Some(current) = best.as_ref() {
        if trace.len() >= opts.max_models {
            break;
        }
        let (p, q) = (current.order.p as i64, current.order.q as i64);
        let mut neighbours = Vec::new();
        for (dp, dq) in [
            (-1, 0),
            (1, 0),
            (0, -1),
            (0, 1),
            (-1, -1),
            (1, 1),
            (-1, 1),
            (1, -1),
        ] {
            let (np, nq) = (p + dp, q + dq);
            if np >= 0 && nq >= 0 {
                neighbours.push((np as usize, nq as usize));
            }
        }
        if !run_round(neighbours, &mut visited, &mut trace, &mut best) {
            break;
        }
    }

    match best {
        Some(best) => Ok(AutoArima {
            best,
            trace,
            kpss_statistics,
        }),
        None => Err(Error::Estimation {
            message: format!(
                "no candidate model could be estimated (d = {d}, {} tried)",
                trace.len()
            ),
            best_loglik: None,
        }),
    }
}
