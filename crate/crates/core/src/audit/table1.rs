use serde::{Deserialize, Serialize};

use crate::detrend::residual_correlation_with;
use crate::error::{Error, Result};
use crate::ingest::StudyBundle;
use crate::series::TimeSeries;
use crate::tscore::KendallOptions;

/// Significance marks: `*` for P < 0.01, `**` for P < 0.005.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stars {
    None,
    Star,
    DoubleStar,
}

impl Stars {
    pub fn for_p(p: f64) -> Self {
        if p < 0.005 {
            Stars::DoubleStar
        } else if p < 0.01 {
            Stars::Star
        } else {
            Stars::None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stars::None => "",
            Stars::Star => "*",
            Stars::DoubleStar => "**",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationCell {
    pub measure: String,
    pub predictor: String,
    pub tau: f64,
    pub p: f64,
    pub n: usize,
    pub stars: Stars,
}

/// Measures (rows) by predictors (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1 {
    pub measures: Vec<String>,
    pub predictors: Vec<String>,
    /// Row-major: `cells[i][j]` is measure `i` against predictor `j`.
    pub cells: Vec<Vec<ReplicationCell>>,
}

impl Table1 {
    pub fn column(&self, predictor: &str) -> Option<Vec<&ReplicationCell>> {
        let j = self.predictors.iter().position(|p| p == predictor)?;
        Some(self.cells.iter().map(|row| &row[j]).collect())
    }

    pub fn flat(&self) -> Vec<ReplicationCell> {
        self.cells.iter().flatten().cloned().collect()
    }
}

/// Residual Kendall correlations of the eight creativity/order measures with
/// each predictor, all regressed on year, collectivism and wealth.
pub fn replicate_table1(
    bundle: &StudyBundle,
    predictors: &[TimeSeries],
    kendall: &KendallOptions,
) -> Result<Table1> {
    if predictors.is_empty() {
        return Err(Error::input("at least one predictor is required"));
    }
    let covariates = bundle.covariates();
    let cells = bundle
        .creativity_order
        .iter()
        .map(|m| {
            predictors
                .iter()
                .map(|pred| {
                    let k = residual_correlation_with(m, pred, &covariates, kendall)?;
                    Ok(ReplicationCell {
                        measure: m.id().to_string(),
                        predictor: pred.id().to_string(),
                        tau: k.tau,
                        p: k.p_two_sided,
                        n: k.n,
                        stars: Stars::for_p(k.p_two_sided),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table1 {
        measures: bundle
            .creativity_order
            .iter()
            .map(|m| m.id().to_string())
            .collect(),
        predictors: predictors.iter().map(|p| p.id().to_string()).collect(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_thresholds() {
        assert_eq!(Stars::for_p(0.0049), Stars::DoubleStar);
        assert_eq!(Stars::for_p(0.005), Stars::Star);
        assert_eq!(Stars::for_p(0.0099), Stars::Star);
        assert_eq!(Stars::for_p(0.01), Stars::None);
    }
}
