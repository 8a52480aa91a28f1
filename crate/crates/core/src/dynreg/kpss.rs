use serde::{Deserialize, Serialize};

use crate::detrend::{ols_fit, Design};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KpssTrend {
    /// Stationary around a constant.
    Level,
    /// Stationary around a linear trend.
    Trend,
}

impl KpssTrend {
    /// Asymptotic 5% critical value.
    pub fn critical_5pct(self) -> f64 {
        match self {
            KpssTrend::Level => 0.463,
            KpssTrend::Trend => 0.146,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KpssResult {
    pub statistic: f64,
    pub lags: usize,
    pub trend: KpssTrend,
}

impl KpssResult {
    /// True when stationarity is rejected at the 5% level.
    pub fn rejects_stationarity(&self) -> bool {
        self.statistic > self.trend.critical_5pct()
    }
}

/// Bandwidth `floor(4 (n / 100)^(1/4))`.
pub fn kpss_lags(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// KPSS statistic with a Bartlett-kernel long-run variance.
pub fn kpss_stat(s: &[f64], trend: KpssTrend) -> Result<f64> {
    kpss_test(s, trend).map(|r| r.statistic)
}

pub fn kpss_test(s: &[f64], trend: KpssTrend) -> Result<KpssResult> {
    let n = s.len();
    if n < 10 {
        return Err(Error::input(format!(
            "KPSS needs at least 10 values, got {n}"
        )));
    }
    let mut design = Design::intercept(n);
    if trend == KpssTrend::Trend {
        design = design.with_column("t", (0..n).map(|t| t as f64).collect())?;
    }
    let resid = ols_fit(s, &design)?.residuals;

    let nf = n as f64;
    let gamma = |lag: usize| -> f64 {
        resid[lag..]
            .iter()
            .zip(&resid)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / nf
    };
    let lags = kpss_lags(n);
    let mut long_run = gamma(0);
    let scale = s.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    if long_run <= 1e-24 * scale * scale {
        return Err(Error::degenerate(
            "series has no variation around the fitted mean/trend",
        ));
    }
    for l in 1..=lags.min(n - 1) {
        long_run += 2.0 * (1.0 - l as f64 / (lags as f64 + 1.0)) * gamma(l);
    }

    let mut partial = 0.0;
    let mut eta = 0.0;
    for e in &resid {
        partial += e;
        eta += partial * partial;
    }
    eta /= nf * nf;

    Ok(KpssResult {
        statistic: eta / long_run,
        lags,
        trend,
    })
}
