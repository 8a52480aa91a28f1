use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dynreg::{auto_arima_with, coef_test, AutoArimaOptions, Regressors};
use crate::error::{Error, Result};
use crate::ingest::{StudyBundle, TIGHTNESS};
use crate::series::{common_years, Source, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Convergent,
    CreativityOrder,
    /// Tightness regressed on a noisy copy of itself.
    Control,
}

impl Block {
    pub fn as_str(self) -> &'static str {
        match self {
            Block::Convergent => "convergent",
            Block::CreativityOrder => "creativity_order",
            Block::Control => "control",
        }
    }
}

/// One dynamic regression of a measure on tightness. Estimation failures
/// leave the numeric fields empty and set `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynregRow {
    pub measure: String,
    pub block: Block,
    pub order: Option<String>,
    pub beta: Option<f64>,
    pub se: Option<f64>,
    pub z: Option<f64>,
    pub p: Option<f64>,
    pub n: usize,
    /// Years filled by interpolation.
    pub bridged_years: usize,
    pub error: Option<String>,
}

impl DynregRow {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p.is_some_and(|p| p < alpha)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidationOptions {
    pub auto: AutoArimaOptions,
    /// Widest interior gap, in years, that is bridged.
    pub max_gap: usize,
    /// Noise added to the control copy, relative to the standard deviation
    /// of the tightness first differences. An exact copy has zero residual
    /// variance and no finite likelihood maximum.
    pub control_noise: f64,
    pub control_seed: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            auto: AutoArimaOptions::default(),
            max_gap: 2,
            control_noise: 0.05,
            control_seed: 0,
        }
    }
}

fn regress(
    measure: &TimeSeries,
    tightness: &TimeSeries,
    block: Block,
    opts: &ValidationOptions,
) -> DynregRow {
    let mut row = DynregRow {
        measure: measure.id().to_string(),
        block,
        order: None,
        beta: None,
        se: None,
        z: None,
        p: None,
        n: 0,
        bridged_years: 0,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let bridged = measure.bridge_gaps(opts.max_gap)?;
        row.bridged_years = bridged.len() - measure.len();
        if row.bridged_years > 0 {
            log::info!(
                "{}: bridged {} missing years",
                measure.id(),
                row.bridged_years
            );
        }
        let years = common_years([&bridged, tightness]);
        let y = bridged.restrict(&years)?;
        let x = tightness.restrict(&years)?;
        if !y.is_contiguous() {
            return Err(Error::input(format!(
                "{}: common years with tightness are not contiguous",
                measure.id()
            )));
        }
        row.n = years.len();
        let search = auto_arima_with(
            y.values(),
            &Regressors::single(TIGHTNESS, x.values().to_vec()),
            &opts.auto,
        )?;
        let t = coef_test(&search.best, TIGHTNESS)?;
        row.order = Some(search.best.order.to_string());
        row.beta = Some(t.estimate);
        row.se = Some(t.se);
        row.z = Some(t.z);
        row.p = Some(t.p_two_sided);
        Ok(())
    })();
    if let Err(e) = outcome {
        log::warn!("{}: {e}", measure.id());
        row.error = Some(e.to_string());
    }
    row
}

fn noisy_copy(s: &TimeSeries, relative: f64, seed: u64) -> Result<TimeSeries> {
    let diffs: Vec<f64> = s.values().windows(2).map(|w| w[1] - w[0]).collect();
    let mean = diffs.iter().sum::<f64>() / diffs.len().max(1) as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / diffs.len().max(2) as f64;
    let scale = relative * var.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = s
        .values()
        .iter()
        .map(|v| {
            let e: f64 = StandardNormal.sample(&mut rng);
            v + scale * e
        })
        .collect();
    s.with_values(
        format!("{}_copy", s.id()),
        values,
        Source::Derived {
            from: s.id().to_string(),
            note: "noisy copy for the positive control".into(),
        },
    )
}

/// Regresses each convergent and creativity/order measure on tightness with
/// ARIMA errors, then runs the positive control. Failures are recorded per
/// row; the run always completes.
pub fn run_dynreg_validation(
    bundle: &StudyBundle,
    opts: &ValidationOptions,
) -> Result<Vec<DynregRow>> {
    let tightness = bundle.tightness.bridge_gaps(opts.max_gap)?;
    let mut rows = Vec::new();
    for m in &bundle.convergent {
        rows.push(regress(m, &tightness, Block::Convergent, opts));
    }
    for m in &bundle.creativity_order {
        rows.push(regress(m, &tightness, Block::CreativityOrder, opts));
    }
    let copy = noisy_copy(&tightness, opts.control_noise, opts.control_seed)?;
    rows.push(regress(&copy, &tightness, Block::Control, opts));
    Ok(rows)
}
