use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::parse_number;
use crate::error::{Error, Result};
use crate::series::{Source, TimeSeries};

/// Column mapping for long-format CSV exports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CatalogSchema {
    /// Column holding the dataset name; when absent every row belongs to the
    /// dataset name given to [`load_catalog`].
    pub dataset: Option<String>,
    pub entity: String,
    pub year: String,
    /// Value column. `None` picks the only column that is not otherwise
    /// mapped (OWID names the value column after the indicator).
    pub value: Option<String>,
    /// Optional entity-code column; ignored apart from schema inference.
    pub code: Option<String>,
}

impl Default for CatalogSchema {
    fn default() -> Self {
        CatalogSchema {
            dataset: None,
            entity: "Entity".into(),
            year: "Year".into(),
            value: None,
            code: Some("Code".into()),
        }
    }
}

impl CatalogSchema {
    /// Schema of the files written by [`dump_catalog`].
    pub fn dump_format() -> Self {
        CatalogSchema {
            dataset: Some("Dataset".into()),
            entity: "Entity".into(),
            year: "Year".into(),
            value: Some("Value".into()),
            code: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source_file: String,
    pub snapshot_date: Option<String>,
    pub citation: Option<String>,
}

/// Per-load bookkeeping of what was skipped or rejected.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    /// Rows whose value cell was empty or not a plain decimal number.
    pub skipped_values: usize,
    /// Rows whose year cell could not be parsed.
    pub skipped_years: usize,
    /// Series dropped entirely, with the reason.
    pub rejected: Vec<RejectedSeries>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedSeries {
    pub dataset: String,
    pub entity: String,
    pub reason: String,
}

pub type CatalogKey = (String, String);

/// One series per `(dataset, entity)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub entries: BTreeMap<CatalogKey, TimeSeries>,
    pub provenance: Vec<Provenance>,
    pub report: LoadReport,
}

impl Catalog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, dataset: &str, entity: &str) -> Option<&TimeSeries> {
        self.entries.get(&(dataset.to_string(), entity.to_string()))
    }

    pub fn datasets(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.entries.keys().map(|(d, _)| d.as_str()).collect();
        names.dedup();
        names
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CatalogKey, &TimeSeries)> {
        self.entries.iter()
    }

    /// Adds every entry of `other`; a key present in both is an error.
    pub fn merge(&mut self, other: Catalog) -> Result<()> {
        for key in other.entries.keys() {
            if self.entries.contains_key(key) {
                return Err(Error::input(format!(
                    "catalog entry {}/{} defined twice",
                    key.0, key.1
                )));
            }
        }
        self.entries.extend(other.entries);
        self.provenance.extend(other.provenance);
        self.report.skipped_values += other.report.skipped_values;
        self.report.skipped_years += other.report.skipped_years;
        self.report.rejected.extend(other.report.rejected);
        Ok(())
    }

    pub fn manifest(&self) -> CatalogManifest {
        let mut datasets: BTreeMap<&str, DatasetSummary> = BTreeMap::new();
        for ((dataset, _), s) in &self.entries {
            let e = datasets.entry(dataset).or_insert_with(|| DatasetSummary {
                dataset: dataset.clone(),
                entities: 0,
                observations: 0,
                year_min: s.first_year(),
                year_max: s.last_year(),
            });
            e.entities += 1;
            e.observations += s.len();
            e.year_min = e.year_min.min(s.first_year());
            e.year_max = e.year_max.max(s.last_year());
        }
        CatalogManifest {
            series: self.entries.len(),
            datasets: datasets.into_values().collect(),
            provenance: self.provenance.clone(),
            report: self.report.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub dataset: String,
    pub entities: usize,
    pub observations: usize,
    pub year_min: i32,
    pub year_max: i32,
}

/// Inventory of a catalog, serialised as the manifest JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogManifest {
    pub series: usize,
    pub datasets: Vec<DatasetSummary>,
    pub provenance: Vec<Provenance>,
    pub report: LoadReport,
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Schema(format!("missing column {name:?}")))
}

/// Reads a long-format CSV (one row per entity and year).
///
/// Rows with an empty or non-numeric value are skipped and counted. An
/// entity with a duplicated year, or with fewer than two usable rows, is
/// rejected as a whole and recorded in the load report.
pub fn load_catalog<R: Read>(
    reader: R,
    schema: &CatalogSchema,
    dataset: &str,
    provenance: Provenance,
) -> Result<Catalog> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let entity_col = column(&headers, &schema.entity)?;
    let year_col = column(&headers, &schema.year)?;
    let dataset_col = schema
        .dataset
        .as_deref()
        .map(|d| column(&headers, d))
        .transpose()?;
    let value_col = match &schema.value {
        Some(v) => column(&headers, v)?,
        None => {
            let mapped: Vec<&str> = [
                Some(schema.entity.as_str()),
                Some(schema.year.as_str()),
                schema.dataset.as_deref(),
                schema.code.as_deref(),
            ]
            .into_iter()
            .flatten()
            .collect();
            let rest: Vec<usize> = (0..headers.len())
                .filter(|&i| !mapped.contains(&&headers[i]))
                .collect();
            match rest.as_slice() {
                [only] => *only,
                [] => return Err(Error::Schema("no value column".into())),
                _ => {
                    return Err(Error::Schema(format!(
                        "ambiguous value column among {:?}; name it in the schema",
                        rest.iter().map(|&i| &headers[i]).collect::<Vec<_>>()
                    )))
                }
            }
        }
    };

    let mut report = LoadReport::default();
    let mut rows: HashMap<CatalogKey, Vec<(i32, f64)>> = HashMap::new();
    let mut order: Vec<CatalogKey> = Vec::new();

    for record in rdr.records() {
        let record = record?;
        let ds = dataset_col.map_or(dataset, |c| &record[c]).to_string();
        let entity = record[entity_col].to_string();
        let Ok(year) = record[year_col].trim().parse::<i32>() else {
            report.skipped_years += 1;
            continue;
        };
        let Some(value) = parse_number(&record[value_col]) else {
            report.skipped_values += 1;
            continue;
        };
        let key = (ds, entity);
        rows.entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push((year, value));
    }

    let mut entries = BTreeMap::new();
    for key in order {
        let mut obs = rows.remove(&key).unwrap_or_default();
        obs.sort_by_key(|&(y, _)| y);
        let reject = |reason: String, report: &mut LoadReport| {
            log::warn!("rejecting {}/{}: {reason}", key.0, key.1);
            report.rejected.push(RejectedSeries {
                dataset: key.0.clone(),
                entity: key.1.clone(),
                reason,
            });
        };
        if let Some(w) = obs.windows(2).find(|w| w[0].0 == w[1].0) {
            reject(format!("duplicate year {}", w[0].0), &mut report);
            continue;
        }
        let (years, values): (Vec<i32>, Vec<f64>) = obs.into_iter().unzip();
        let source = Source::Catalog {
            dataset: key.0.clone(),
            entity: key.1.clone(),
        };
        match TimeSeries::new(format!("{}/{}", key.0, key.1), years, values, source) {
            Ok(s) => {
                entries.insert(key, s);
            }
            Err(e) => reject(e.to_string(), &mut report),
        }
    }

    if report.skipped_values + report.skipped_years > 0 {
        log::warn!(
            "{}: skipped {} rows with unusable values and {} with unusable years",
            provenance.source_file,
            report.skipped_values,
            report.skipped_years
        );
    }

    Ok(Catalog {
        entries,
        provenance: vec![provenance],
        report,
    })
}

/// Writes the catalog in the long `Dataset,Entity,Year,Value` layout read
/// back by [`CatalogSchema::dump_format`].
pub fn dump_catalog<W: Write>(catalog: &Catalog, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["Dataset", "Entity", "Year", "Value"])?;
    for ((dataset, entity), s) in &catalog.entries {
        for (y, v) in s.years().iter().zip(s.values()) {
            w.write_record([dataset.as_str(), entity, &y.to_string(), &format!("{v:?}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Builds a catalog from in-memory series, keyed by `(dataset, series id)`.
pub fn catalog_from_series(dataset: &str, series: Vec<TimeSeries>) -> Result<Catalog> {
    let mut entries = BTreeMap::new();
    for s in series {
        let key = (dataset.to_string(), s.id().to_string());
        if entries.insert(key, s).is_some() {
            return Err(Error::input(format!(
                "duplicate series id in dataset {dataset}"
            )));
        }
    }
    Ok(Catalog {
        entries,
        provenance: vec![Provenance {
            source_file: format!("<generated:{dataset}>"),
            ..Provenance::default()
        }],
        report: LoadReport::default(),
    })
}
