use serde::{Deserialize, Serialize};

use super::ols::{ols_fit, Design, OlsFit};
use crate::error::{Error, Result};
use crate::series::{common_years, Source, TimeSeries};
use crate::tscore::{kendall_tau_with, KendallOptions, KendallResult};

/// Residuals of a series regressed on intercept, year and covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSeries {
    pub base_id: String,
    pub residuals: TimeSeries,
    pub covariate_set: Vec<String>,
    pub fit: OlsFit,
}

/// `[intercept, year, covariates...]` on `years`. Every covariate must cover
/// every requested year.
pub fn time_design(years: &[i32], covariates: &[TimeSeries]) -> Result<Design> {
    let mut design = Design::intercept(years.len())
        .with_column("year", years.iter().map(|&y| f64::from(y)).collect())?;
    for c in covariates {
        design = design.with_column(c.id(), c.restrict(years)?.values().to_vec())?;
    }
    Ok(design)
}

fn min_rows(covariates: &[TimeSeries]) -> usize {
    // k design columns plus two spare degrees of freedom.
    covariates.len() + 2 + 2
}

/// Regresses `s` on `[intercept, year, covariates...]` over the years shared
/// by `s` and every covariate and returns the residuals.
pub fn residualize(s: &TimeSeries, covariates: &[TimeSeries]) -> Result<ResidualSeries> {
    let years = common_years(std::iter::once(s).chain(covariates));
    residualize_on(s, covariates, &years)
}

/// [`residualize`] on an explicit year set (sorted, contained in all inputs).
pub fn residualize_on(
    s: &TimeSeries,
    covariates: &[TimeSeries],
    years: &[i32],
) -> Result<ResidualSeries> {
    let required = min_rows(covariates);
    if years.len() < required {
        return Err(Error::Alignment {
            common: years.len(),
            required,
        });
    }
    let design = time_design(years, covariates)?;
    let response = s.restrict(years)?;
    let fit = ols_fit(response.values(), &design)?;
    let residuals = TimeSeries::new(
        format!("{}_resid", s.id()),
        years.to_vec(),
        fit.residuals.clone(),
        Source::Derived {
            from: s.id().to_string(),
            note: "ols residuals on year and covariates".into(),
        },
    )?;
    Ok(ResidualSeries {
        base_id: s.id().to_string(),
        residuals,
        covariate_set: design.labels().to_vec(),
        fit,
    })
}

/// Kendall correlation between the residuals of `a` and `b`, both regressed
/// on the same covariates over the years common to all inputs.
pub fn residual_correlation(
    a: &TimeSeries,
    b: &TimeSeries,
    covariates: &[TimeSeries],
) -> Result<KendallResult> {
    residual_correlation_with(a, b, covariates, &KendallOptions::default())
}

pub fn residual_correlation_with(
    a: &TimeSeries,
    b: &TimeSeries,
    covariates: &[TimeSeries],
    opts: &KendallOptions,
) -> Result<KendallResult> {
    let years = common_years([a, b].into_iter().chain(covariates));
    let ra = residualize_on(a, covariates, &years)?;
    let rb = residualize_on(b, covariates, &years)?;
    kendall_tau_with(ra.residuals.values(), rb.residuals.values(), opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn study(id: &str, start: i32, values: Vec<f64>) -> TimeSeries {
        TimeSeries::from_start(id, start, values, Source::Study { measure: id.into() }).unwrap()
    }

    #[test]
    fn affine_series_has_zero_residuals() {
        let s = study(
            "s",
            1900,
            (0..30).map(|t| 5.0 + 0.5 * f64::from(t)).collect(),
        );
        let r = residualize(&s, &[]).unwrap();
        assert!(r.residuals.values().iter().all(|v| v.abs() < 1e-9));
        assert_eq!(r.covariate_set, vec!["intercept", "year"]);
    }

    #[test]
    fn self_correlation_is_one() {
        let a = study("a", 1900, (0..30).map(|t| f64::from(t * t % 17)).collect());
        let c = study("c", 1890, (0..50).map(|t| f64::from(t).sqrt()).collect());
        let r = residual_correlation(&a, &a, &[c]).unwrap();
        assert!((r.tau - 1.0).abs() < 1e-12);
    }

    #[test]
    fn insufficient_overlap() {
        let a = study("a", 1900, vec![1.0, 3.0, 2.0, 5.0, 4.0]);
        let c = study("c", 1903, vec![1.0, 2.0, 3.0, 9.0]);
        assert!(matches!(
            residualize(&a, &[c]),
            Err(Error::Alignment { common: 2, .. })
        ));
    }
}
