//! The year-indexed series that every analysis operates on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simgen::SeriesClass;

/// Where a series came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Simulated { class: SeriesClass, seed: u64 },
    Catalog { dataset: String, entity: String },
    Study { measure: String },
    Derived { from: String, note: String },
}

/// Annual observations indexed by calendar year.
///
/// Years are strictly increasing and every value is finite. Missing years are
/// absent rather than sentinel-coded, so a series may have interior gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    id: String,
    years: Vec<i32>,
    values: Vec<f64>,
    source: Source,
}

impl TimeSeries {
    pub fn new(
        id: impl Into<String>,
        years: Vec<i32>,
        values: Vec<f64>,
        source: Source,
    ) -> Result<Self> {
        let id = id.into();
        if years.len() != values.len() {
            return Err(Error::input(format!(
                "series {id}: {} years but {} values",
                years.len(),
                values.len()
            )));
        }
        if years.len() < 2 {
            return Err(Error::input(format!(
                "series {id}: need at least 2 observations, got {}",
                years.len()
            )));
        }
        if let Some(w) = years.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::input(format!(
                "series {id}: years not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "series {id}: non-finite value at year {}",
                years[pos]
            )));
        }
        Ok(TimeSeries {
            id,
            years,
            values,
            source,
        })
    }

    /// Series over consecutive years starting at `start_year`.
    pub fn from_start(
        id: impl Into<String>,
        start_year: i32,
        values: Vec<f64>,
        source: Source,
    ) -> Result<Self> {
        let years = (0..values.len()).map(|i| start_year + i as i32).collect();
        Self::new(id, years, values, source)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }

    pub fn first_year(&self) -> i32 {
        self.years[0]
    }

    pub fn last_year(&self) -> i32 {
        self.years[self.years.len() - 1]
    }

    /// Value observed in `year`, if present.
    pub fn get(&self, year: i32) -> Option<f64> {
        self.years.binary_search(&year).ok().map(|i| self.values[i])
    }

    /// True when there are no missing years between the first and last.
    pub fn is_contiguous(&self) -> bool {
        self.years.windows(2).all(|w| w[1] == w[0] + 1)
    }

    /// Interior gaps as `(last_present, next_present)` year pairs.
    pub fn gaps(&self) -> Vec<(i32, i32)> {
        self.years
            .windows(2)
            .filter(|w| w[1] > w[0] + 1)
            .map(|w| (w[0], w[1]))
            .collect()
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Same years, new values.
    pub fn with_values(
        &self,
        id: impl Into<String>,
        values: Vec<f64>,
        source: Source,
    ) -> Result<Self> {
        Self::new(id, self.years.clone(), values, source)
    }

    /// Restricts the series to the given sorted year list. Every requested
    /// year must be present.
    pub fn restrict(&self, years: &[i32]) -> Result<Self> {
        let mut values = Vec::with_capacity(years.len());
        for &y in years {
            match self.get(y) {
                Some(v) => values.push(v),
                None => {
                    return Err(Error::input(format!(
                        "series {}: year {y} not present",
                        self.id
                    )))
                }
            }
        }
        Self::new(self.id.clone(), years.to_vec(), values, self.source.clone())
    }

    /// Fills interior gaps of at most `max_gap` missing years by linear
    /// interpolation. Wider gaps are an error.
    pub fn bridge_gaps(&self, max_gap: usize) -> Result<Self> {
        let mut years = Vec::with_capacity(self.len());
        let mut values = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            if i > 0 {
                let (y0, y1) = (self.years[i - 1], self.years[i]);
                let missing = (y1 - y0 - 1) as usize;
                if missing > max_gap {
                    return Err(Error::input(format!(
                        "series {}: gap of {missing} years between {y0} and {y1} exceeds {max_gap}",
                        self.id
                    )));
                }
                let (v0, v1) = (self.values[i - 1], self.values[i]);
                for k in 1..=missing as i32 {
                    let w = f64::from(k) / f64::from(y1 - y0);
                    years.push(y0 + k);
                    values.push(v0 + w * (v1 - v0));
                }
            }
            years.push(self.years[i]);
            values.push(self.values[i]);
        }
        Self::new(self.id.clone(), years, values, self.source.clone())
    }
}

/// Sorted intersection of the year sets of several series.
pub fn common_years<'a>(series: impl IntoIterator<Item = &'a TimeSeries>) -> Vec<i32> {
    let mut iter = series.into_iter();
    let Some(first) = iter.next() else {
        return Vec::new();
    };
    let mut years = first.years().to_vec();
    for s in iter {
        years.retain(|y| s.years().binary_search(y).is_ok());
    }
    years
}

#[cfg(test)]
mod tests {
    use super::*;

    fn study(name: &str) -> Source {
        Source::Study {
            measure: name.into(),
        }
    }

    #[test]
    fn rejects_bad_series() {
        assert!(TimeSeries::new("a", vec![2000], vec![1.0], study("a")).is_err());
        assert!(TimeSeries::new("a", vec![2000, 2000], vec![1.0, 2.0], study("a")).is_err());
        assert!(TimeSeries::new("a", vec![2001, 2000], vec![1.0, 2.0], study("a")).is_err());
        assert!(TimeSeries::new("a", vec![2000, 2001], vec![1.0, f64::NAN], study("a")).is_err());
        assert!(TimeSeries::new("a", vec![2000, 2001], vec![1.0], study("a")).is_err());
    }

    #[test]
    fn bridges_short_gaps_only() {
        let s =
            TimeSeries::new("a", vec![1, 2, 5, 6], vec![0.0, 1.0, 4.0, 5.0], study("a")).unwrap();
        assert_eq!(s.gaps(), vec![(2, 5)]);
        let b = s.bridge_gaps(2).unwrap();
        assert!(b.is_contiguous());
        assert_eq!(b.values(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(s.bridge_gaps(1).is_err());
    }

    #[test]
    fn intersects_years() {
        let a = TimeSeries::from_start("a", 1990, vec![0.0; 10], study("a")).unwrap();
        let b =
            TimeSeries::new("b", vec![1985, 1992, 1995, 2005], vec![0.0; 4], study("b")).unwrap();
        assert_eq!(common_years([&a, &b]), vec![1992, 1995]);
    }
}
