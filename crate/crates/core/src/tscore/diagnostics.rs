use serde::{Deserialize, Serialize};

use super::kendall::{kendall_tau, KendallResult};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Trend and lag-1 dependence of one series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesDiagnostics {
    /// Kendall correlation with calendar year.
    pub tau_y: f64,
    /// Kendall correlation between consecutive values.
    pub tau_l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSummary {
    pub class_label: String,
    pub abs_tau_y_median: f64,
    pub tau_l_median: f64,
    pub count: usize,
}

/// Kendall tau of the values against their years.
pub fn trend_correlation(s: &TimeSeries) -> Result<f64> {
    let years: Vec<f64> = s.years().iter().map(|&y| f64::from(y)).collect();
    Ok(kendall_tau(&years, s.values())?.tau)
}

/// Pairs `(v[t-1], v[t])` for every pair of consecutive calendar years present.
pub fn lag_pairs(s: &TimeSeries) -> (Vec<f64>, Vec<f64>) {
    let (years, values) = (s.years(), s.values());
    let mut lagged = Vec::with_capacity(s.len());
    let mut current = Vec::with_capacity(s.len());
    for i in 1..s.len() {
        if years[i] == years[i - 1] + 1 {
            lagged.push(values[i - 1]);
            current.push(values[i]);
        }
    }
    (lagged, current)
}

/// Kendall tau between each value and its predecessor one year earlier.
///
/// Pairs are only formed across consecutive years, so a gap breaks the chain.
pub fn lag1_dependence(s: &TimeSeries) -> Result<f64> {
    if s.len() < 3 {
        return Err(Error::input(format!(
            "series {}: need at least 3 observations for lag dependence",
            s.id()
        )));
    }
    let (lagged, current) = lag_pairs(s);
    if lagged.len() < 2 {
        return Err(Error::degenerate(format!(
            "series {}: only {} consecutive-year pairs",
            s.id(),
            lagged.len()
        )));
    }
    Ok(kendall_tau(&lagged, &current)?.tau)
}

pub fn diagnose(s: &TimeSeries) -> Result<SeriesDiagnostics> {
    Ok(SeriesDiagnostics {
        tau_y: trend_correlation(s)?,
        tau_l: lag1_dependence(s)?,
    })
}

/// Median with the midpoint convention for even lengths. `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    })
}

/// Median `|tau_Y|` and signed median `tau_L` over a batch.
pub fn summarize_diagnostics(
    batch: &[SeriesDiagnostics],
    label: impl Into<String>,
) -> Result<DiagnosticSummary> {
    if batch.is_empty() {
        return Err(Error::input("empty diagnostics batch"));
    }
    let abs_y: Vec<f64> = batch.iter().map(|d| d.tau_y.abs()).collect();
    let lag: Vec<f64> = batch.iter().map(|d| d.tau_l).collect();
    Ok(DiagnosticSummary {
        class_label: label.into(),
        abs_tau_y_median: median(&abs_y).unwrap_or(0.0),
        tau_l_median: median(&lag).unwrap_or(0.0),
        count: batch.len(),
    })
}

/// Fraction of results with `p < alpha`.
pub fn significance_rate(results: &[KendallResult], alpha: f64) -> Result<f64> {
    rate_of(results.iter().map(|r| r.p_two_sided), alpha)
}

/// Same as [`significance_rate`] on bare P-values.
pub fn rate_of(p_values: impl IntoIterator<Item = f64>, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::input(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let (mut hits, mut total) = (0usize, 0usize);
    for p in p_values {
        total += 1;
        if p < alpha {
            hits += 1;
        }
    }
    if total == 0 {
        return Err(Error::input("no results to aggregate"));
    }
    Ok(hits as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Source;
    use crate::tscore::kendall::PValueMethod;

    fn series(years: Vec<i32>, values: Vec<f64>) -> TimeSeries {
        TimeSeries::new(
            "t",
            years,
            values,
            Source::Study {
                measure: "t".into(),
            },
        )
        .unwrap()
    }

    #[test]
    fn monotone_series() {
        let up = series(
            (2000..2010).collect(),
            (0..10).map(|v| f64::from(v * v)).collect(),
        );
        assert_eq!(trend_correlation(&up).unwrap(), 1.0);
        assert_eq!(lag1_dependence(&up).unwrap(), 1.0);
        let down = series(
            (2000..2010).collect(),
            (0..10).rev().map(f64::from).collect(),
        );
        assert_eq!(trend_correlation(&down).unwrap(), -1.0);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let flat = series((2000..2010).collect(), vec![3.0; 10]);
        assert!(matches!(
            trend_correlation(&flat),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn lag_pairs_respect_gaps() {
        let s = series(vec![1, 2, 4, 5, 7], vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let (a, b) = lag_pairs(&s);
        assert_eq!(a, vec![1.0, 3.0]);
        assert_eq!(b, vec![2.0, 4.0]);
        let sparse = series(vec![1, 3, 5, 6], vec![1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(
            lag1_dependence(&sparse),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn summary_medians() {
        let one = [SeriesDiagnostics {
            tau_y: -0.5,
            tau_l: 0.3,
        }];
        let s = summarize_diagnostics(&one, "x").unwrap();
        assert_eq!((s.abs_tau_y_median, s.tau_l_median, s.count), (0.5, 0.3, 1));

        let two = [
            SeriesDiagnostics {
                tau_y: -0.2,
                tau_l: 0.1,
            },
            SeriesDiagnostics {
                tau_y: 0.4,
                tau_l: -0.3,
            },
        ];
        let s = summarize_diagnostics(&two, "x").unwrap();
        assert!((s.abs_tau_y_median - 0.3).abs() < 1e-15);
        assert!((s.tau_l_median + 0.1).abs() < 1e-15);
        assert!(summarize_diagnostics(&[], "x").is_err());
    }

    #[test]
    fn rates() {
        let r = KendallResult {
            tau: 0.9,
            p_two_sided: 0.001,
            n: 10,
            ties_x: 0,
            ties_y: 0,
            statistic: 40,
            method: PValueMethod::Exact,
        };
        assert_eq!(significance_rate(&[r; 5], 0.05).unwrap(), 1.0);
        assert!(significance_rate(&[], 0.05).is_err());
        assert!(significance_rate(&[r], 1.5).is_err());
        assert_eq!(rate_of([0.01, 0.2, 0.04, 0.5], 0.05).unwrap(), 0.5);
    }
}
