use std::io::Read;

use serde::{Deserialize, Serialize};

use super::parse_number;
use crate::error::{Error, Result};
use crate::series::{Source, TimeSeries};

pub const YEAR: &str = "year";
pub const TIGHTNESS: &str = "tightness";
pub const COLLECTIVISM: &str = "collectivism";
pub const WEALTH: &str = "wealth";

/// Convergent-validity measures, in reporting order.
pub const CONVERGENT: [&str; 5] = [
    "religiosity",
    "congress_laws",
    "supreme_court_cases",
    "execution_rates",
    "profanity",
];

/// Creativity/order outcomes, in reporting order.
pub const CREATIVITY_ORDER: [&str; 8] = [
    "patent_rates",
    "trademark_rates",
    "feature_films",
    "baby_naming_conformity",
    "household_debt",
    "adolescent_pregnancy",
    "crimes",
    "high_school_enrolment",
];

/// Human-readable names for report output.
pub fn display_name(column: &str) -> &str {
    match column {
        TIGHTNESS => "Cultural tightness",
        COLLECTIVISM => "Collectivism",
        WEALTH => "Wealth",
        "religiosity" => "Religiosity",
        "congress_laws" => "Laws passed by Congress",
        "supreme_court_cases" => "Supreme Court cases",
        "execution_rates" => "Execution rates",
        "profanity" => "Profanity on television",
        "patent_rates" => "Patent rates",
        "trademark_rates" => "Trademark rates",
        "feature_films" => "Feature film production",
        "baby_naming_conformity" => "Baby-naming conformity",
        "household_debt" => "Household debt rates",
        "adolescent_pregnancy" => "Adolescent pregnancy rates",
        "crimes" => "Crimes",
        "high_school_enrolment" => "High school enrolment",
        other => other,
    }
}

/// The original study's series: the index, its validation measures, the
/// outcomes and the two covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyBundle {
    pub tightness: TimeSeries,
    pub convergent: Vec<TimeSeries>,
    pub creativity_order: Vec<TimeSeries>,
    pub collectivism: TimeSeries,
    pub wealth: TimeSeries,
}

impl StudyBundle {
    /// `[collectivism, wealth]`, the covariates regressed out alongside year.
    pub fn covariates(&self) -> Vec<TimeSeries> {
        vec![self.collectivism.clone(), self.wealth.clone()]
    }

    pub fn measure(&self, name: &str) -> Option<&TimeSeries> {
        self.convergent
            .iter()
            .chain(&self.creativity_order)
            .chain([&self.tightness, &self.collectivism, &self.wealth])
            .find(|s| s.id() == name)
    }
}

/// Reads named columns from a wide CSV with a `year` column. Empty cells are
/// missing years for that column only.
pub fn read_wide<R: Read>(reader: R, wanted: &[&str]) -> Result<Vec<TimeSeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("missing required column {name:?}")))
    };
    let year_col = find(YEAR)?;
    let cols: Vec<usize> = wanted.iter().map(|w| find(w)).collect::<Result<_>>()?;

    let mut data: Vec<(Vec<i32>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); wanted.len()];
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let year: i32 = record[year_col].trim().parse().map_err(|_| {
            Error::Format(format!(
                "row {}: bad year {:?}",
                line + 2,
                &record[year_col]
            ))
        })?;
        for (k, &c) in cols.iter().enumerate() {
            let cell = record[c].trim();
            if cell.is_empty() {
                continue;
            }
            let v = parse_number(cell).ok_or_else(|| {
                Error::Format(format!(
                    "row {}: column {}: not a number {cell:?}",
                    line + 2,
                    wanted[k]
                ))
            })?;
            data[k].0.push(year);
            data[k].1.push(v);
        }
    }

    wanted
        .iter()
        .zip(data)
        .map(|(name, (years, values))| {
            TimeSeries::new(
                *name,
                years,
                values,
                Source::Study {
                    measure: (*name).to_string(),
                },
            )
        })
        .collect()
}

/// Loads the study bundle. Every required column must be present.
pub fn load_study<R: Read>(reader: R) -> Result<StudyBundle> {
    let mut wanted = vec![TIGHTNESS, COLLECTIVISM, WEALTH];
    wanted.extend(CONVERGENT);
    wanted.extend(CREATIVITY_ORDER);
    let mut series = read_wide(reader, &wanted)?.into_iter();
    let mut next = || series.next().expect("one series per wanted column");
    let tightness = next();
    let collectivism = next();
    let wealth = next();
    let convergent = (0..CONVERGENT.len()).map(|_| next()).collect();
    let creativity_order = (0..CREATIVITY_ORDER.len()).map(|_| next()).collect();
    Ok(StudyBundle {
        tightness,
        convergent,
        creativity_order,
        collectivism,
        wealth,
    })
}

/// Loads one series from a wide CSV: the named column, or the only non-year
/// column when `column` is `None`.
pub fn load_series<R: Read>(reader: R, column: Option<&str>) -> Result<TimeSeries> {
    let mut buf = String::new();
    let mut reader = reader;
    reader.read_to_string(&mut buf)?;
    let name = match column {
        Some(c) => c.to_string(),
        None => {
            let mut rdr = csv::Reader::from_reader(buf.as_bytes());
            let headers = rdr.headers()?;
            let rest: Vec<&str> = headers.iter().filter(|h| h.trim() != YEAR).collect();
            match rest.as_slice() {
                [only] => only.trim().to_string(),
                _ if rest.contains(&TIGHTNESS) => TIGHTNESS.to_string(),
                _ => {
                    return Err(Error::Schema(format!(
                        "cannot pick a series among columns {rest:?}"
                    )))
                }
            }
        }
    };
    let mut out = read_wide(buf.as_bytes(), &[name.as_str()])?;
    Ok(out.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> String {
        let mut cols = vec![YEAR, TIGHTNESS, COLLECTIVISM, WEALTH];
        cols.extend(CONVERGENT);
        cols.extend(CREATIVITY_ORDER);
        cols.join(",")
    }

    fn row(year: i32, blank: Option<usize>) -> String {
        let mut cells = vec![year.to_string()];
        for k in 0..16 {
            if Some(k) == blank {
                cells.push(String::new());
            } else {
                cells.push(format!("{}", f64::from(year) * 0.5 + k as f64));
            }
        }
        cells.join(",")
    }

    #[test]
    fn loads_bundle_with_independent_gaps() {
        let mut text = header() + "\n";
        for y in 1900..1910 {
            let blank = if y == 1905 { Some(5) } else { None };
            text += &(row(y, blank) + "\n");
        }
        let b = load_study(text.as_bytes()).unwrap();
        assert_eq!(b.tightness.len(), 10);
        assert_eq!(b.convergent.len(), 5);
        assert_eq!(b.creativity_order.len(), 8);
        // Column index 5 (0-based after year) is the third convergent measure.
        let gappy = &b.convergent[2];
        assert_eq!(gappy.id(), "supreme_court_cases");
        assert_eq!(gappy.len(), 9);
        assert_eq!(gappy.gaps(), vec![(1904, 1906)]);
        assert_eq!(b.convergent[1].len(), 10);
    }

    #[test]
    fn missing_column_is_named() {
        let text = "year,tightness,collectivism\n1900,1,2\n1901,2,3\n";
        match load_study(text.as_bytes()) {
            Err(Error::Schema(msg)) => assert!(msg.contains("wealth"), "{msg}"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn single_series_file() {
        let s = load_series("year,tightness\n1800,2\n1801,1.5\n".as_bytes(), None).unwrap();
        assert_eq!(s.id(), "tightness");
        assert_eq!(s.len(), 2);
    }
}
