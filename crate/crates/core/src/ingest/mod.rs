//! Reading real-world series: the study's wide CSV and long-format catalog
//! exports, plus year alignment.

mod catalog;
mod study;

use serde::{Deserialize, Serialize};

pub use catalog::{
    catalog_from_series, dump_catalog, load_catalog, Catalog, CatalogKey, CatalogManifest,
    CatalogSchema, DatasetSummary, LoadReport, Provenance, RejectedSeries,
};
pub use study::{
    display_name, load_series, load_study, read_wide, StudyBundle, COLLECTIVISM, CONVERGENT,
    CREATIVITY_ORDER, TIGHTNESS, WEALTH, YEAR,
};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Minimum number of shared years for a pair to be analysed.
pub const DEFAULT_MIN_OVERLAP: usize = 10;

/// Plain decimal numbers only: digits, sign, one decimal point, exponent.
/// Locale forms (`1,5`), `inf` and `nan` are rejected.
pub(crate) fn parse_number(cell: &str) -> Option<f64> {
    let cell = cell.trim();
    if cell.is_empty()
        || !cell
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
    {
        return None;
    }
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Observations of two series over their common years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aligned {
    pub years: Vec<i32>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Aligned {
    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }
}

/// Pairs `a` and `b` over the sorted intersection of their years.
pub fn align(a: &TimeSeries, b: &TimeSeries, min_overlap: usize) -> Result<Aligned> {
    if min_overlap < 3 {
        return Err(Error::input(format!(
            "min_overlap must be >= 3, got {min_overlap}"
        )));
    }
    let mut out = Aligned {
        years: Vec::new(),
        a: Vec::new(),
        b: Vec::new(),
    };
    let (mut i, mut j) = (0, 0);
    let (ya, yb) = (a.years(), b.years());
    while i < ya.len() && j < yb.len() {
        match ya[i].cmp(&yb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.years.push(ya[i]);
                out.a.push(a.values()[i]);
                out.b.push(b.values()[j]);
                i += 1;
                j += 1;
            }
        }
    }
    if out.len() < min_overlap {
        return Err(Error::Alignment {
            common: out.len(),
            required: min_overlap,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Source;

    fn s(years: Vec<i32>) -> TimeSeries {
        let values = years.iter().map(|&y| f64::from(y)).collect();
        TimeSeries::new(
            "s",
            years,
            values,
            Source::Study {
                measure: "s".into(),
            },
        )
        .unwrap()
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_number(" 1.5 "), Some(1.5));
        assert_eq!(parse_number("-2e3"), Some(-2000.0));
        assert_eq!(parse_number("1,5"), None);
        assert_eq!(parse_number("inf"), None);
        assert_eq!(parse_number("NaN"), None);
        assert_eq!(parse_number(""), None);
    }

    #[test]
    fn identical_and_disjoint_years() {
        let a = s((2000..2010).collect());
        let full = align(&a, &a, 3).unwrap();
        assert_eq!(full.len(), 10);
        let b = s((1900..1910).collect());
        assert!(matches!(
            align(&a, &b, 3),
            Err(Error::Alignment { common: 0, .. })
        ));
        assert!(align(&a, &a, 2).is_err());
    }
}
