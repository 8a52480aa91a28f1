//! Writes the synthetic stand-in fixtures under `fixtures/`.
//!
//! The series have plausible shapes and year ranges for the measures they
//! stand in for, but every value is drawn from a seeded generator. Only the
//! tightness index is tuned, to target trend and lag-1 diagnostics;
//! no series is tuned towards any association with another.
//!
//!     cargo run --example make_fixtures -- fixtures

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const SEED: u64 = 20_240_501;

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Stationary AR(1) noise.
fn ar1(rng: &mut ChaCha8Rng, n: usize, phi: f64, sd: f64) -> Vec<f64> {
    let mut x = sd * normal(rng) / (1.0 - phi * phi).sqrt();
    (0..n)
        .map(|_| {
            x = phi * x + sd * normal(rng);
            x
        })
        .collect()
}

/// AR(1) noise passed through a second AR(1) filter: smooth, slowly
/// wandering deviations with small year-to-year steps.
fn smooth_noise(rng: &mut ChaCha8Rng, n: usize, phi: f64, sd: f64) -> Vec<f64> {
    let mut y = 0.0;
    ar1(rng, n, phi, sd)
        .into_iter()
        .map(|e| {
            y = phi * y + e;
            y
        })
        .collect()
}

fn logistic(t: f64, mid: f64, rate: f64) -> f64 {
    1.0 / (1.0 + (-(t - mid) * rate).exp())
}

struct Column {
    name: &'static str,
    start: i32,
    values: Vec<f64>,
    /// Years left blank.
    missing: Vec<i32>,
}

impl Column {
    fn get(&self, year: i32) -> Option<f64> {
        if self.missing.contains(&year) || year < self.start {
            return None;
        }
        self.values.get((year - self.start) as usize).copied()
    }
}

/// `shape(t)` for `t` in `0..n` plus AR(1) noise with the given persistence,
/// scaled by `noise` relative to the shape's range.
fn shaped(
    rng: &mut ChaCha8Rng,
    name: &'static str,
    start: i32,
    end: i32,
    shape: impl Fn(f64) -> f64,
    phi: f64,
    noise: f64,
) -> Column {
    let n = (end - start + 1) as usize;
    let base: Vec<f64> = (0..n).map(|t| shape(t as f64 / (n - 1) as f64)).collect();
    let range = base.iter().cloned().fold(f64::MIN, f64::max)
        - base.iter().cloned().fold(f64::MAX, f64::min);
    let e = ar1(rng, n, phi, noise * range.max(1e-9));
    Column {
        name,
        start,
        values: base.iter().zip(&e).map(|(b, e)| b + e).collect(),
        missing: Vec::new(),
    }
}

/// Like [`shaped`] with noise proportional to the level, for growth series.
fn growth(
    rng: &mut ChaCha8Rng,
    name: &'static str,
    start: i32,
    end: i32,
    shape: impl Fn(f64) -> f64,
    phi: f64,
    noise: f64,
) -> Column {
    let n = (end - start + 1) as usize;
    let e = ar1(rng, n, phi, noise);
    Column {
        name,
        start,
        values: (0..n)
            .map(|t| shape(t as f64 / (n - 1) as f64) * (1.0 + e[t]))
            .collect(),
        missing: Vec::new(),
    }
}

fn study_columns(rng: &mut ChaCha8Rng) -> Vec<Column> {
    let mut tightness = shaped(
        rng,
        "tightness",
        1800,
        2000,
        |t| 1.2 - 1.6 * t - 0.6 * t * t,
        0.9,
        0.0,
    );
    let wander = smooth_noise(rng, tightness.values.len(), 0.9, 0.0058);
    for (v, w) in tightness.values.iter_mut().zip(wander) {
        *v += w;
    }
    let collectivism = shaped(
        rng,
        "collectivism",
        1800,
        2000,
        |t| 0.8 - 0.9 * t,
        0.9,
        0.05,
    );
    let wealth = growth(rng, "wealth", 1800, 2000, |t| (3.5 * t).exp(), 0.8, 0.02);

    let mut c = vec![tightness, collectivism, wealth];
    c.push(shaped(
        rng,
        "religiosity",
        1800,
        2000,
        |t| 0.9 - 0.5 * t * t,
        0.9,
        0.08,
    ));
    let mut laws = shaped(
        rng,
        "congress_laws",
        1890,
        2000,
        |t| 300.0 + 900.0 * (-(t - 0.45).powi(2) / 0.05).exp(),
        0.85,
        0.1,
    );
    laws.missing = vec![1943];
    c.push(laws);
    c.push(shaped(
        rng,
        "supreme_court_cases",
        1850,
        2000,
        |t| 40.0 + 120.0 * logistic(t, 0.6, 9.0),
        0.85,
        0.08,
    ));
    c.push(shaped(
        rng,
        "execution_rates",
        1900,
        2000,
        |t| 1.0 + 0.6 * (6.0 * t).sin(),
        0.9,
        0.25,
    ));
    c.push(shaped(
        rng,
        "profanity",
        1950,
        2000,
        |t| 0.1 + 2.0 * t * t,
        0.8,
        0.06,
    ));

    c.push(growth(
        rng,
        "patent_rates",
        1800,
        2000,
        |t| 5.0 + 300.0 * logistic(t, 0.55, 8.0),
        0.9,
        0.05,
    ));
    c.push(growth(
        rng,
        "trademark_rates",
        1870,
        2000,
        |t| (3.0 * t).exp(),
        0.85,
        0.05,
    ));
    c.push(shaped(
        rng,
        "feature_films",
        1920,
        2000,
        |t| 500.0 - 250.0 * t + 150.0 * t * t,
        0.9,
        0.12,
    ));
    c.push(shaped(
        rng,
        "baby_naming_conformity",
        1880,
        2000,
        |t| 0.5 - 0.35 * t,
        0.9,
        0.05,
    ));
    let mut debt = shaped(
        rng,
        "household_debt",
        1950,
        2000,
        |t| 0.3 + 0.7 * t,
        0.9,
        0.05,
    );
    debt.missing = vec![1971, 1972];
    c.push(debt);
    c.push(shaped(
        rng,
        "adolescent_pregnancy",
        1940,
        2000,
        |t| 60.0 + 40.0 * (-(t - 0.3).powi(2) / 0.06).exp(),
        0.85,
        0.06,
    ));
    c.push(shaped(
        rng,
        "crimes",
        1960,
        2000,
        |t| 3.0 + 3.0 * (-(t - 0.75).powi(2) / 0.08).exp(),
        0.85,
        0.06,
    ));
    c.push(shaped(
        rng,
        "high_school_enrolment",
        1870,
        2000,
        |t| 0.05 + 0.9 * logistic(t, 0.45, 10.0),
        0.9,
        0.03,
    ));
    c
}

fn write_wide(path: &Path, cols: &[&Column]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["year".to_string()];
    header.extend(cols.iter().map(|c| c.name.to_string()));
    w.write_record(&header)?;
    for year in 1800..=2000 {
        let cells: Vec<Option<f64>> = cols.iter().map(|c| c.get(year)).collect();
        if cells.iter().all(Option::is_none) {
            continue;
        }
        let mut rec = vec![year.to_string()];
        rec.extend(
            cells
                .iter()
                .map(|v| v.map(|v| format!("{v:.6}")).unwrap_or_default()),
        );
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One long-format dataset: `Entity,Code,Year,<value>`.
struct Dataset {
    file: &'static str,
    value: &'static str,
    rows: Vec<(String, String, i32, f64)>,
}

fn entity_code(name: &str, i: usize) -> String {
    match name {
        "Costa Rica" => "CRI".into(),
        "Uganda" => "UGA".into(),
        "India" => "IND".into(),
        "World" => "OWID_WRL".into(),
        _ => format!("X{i:03}"),
    }
}

/// `count` entities named after `lead` and placeholders, each following
/// `shape` with entity-specific timing and AR(1) noise.
#[allow(clippy::too_many_arguments)]
fn dataset(
    rng: &mut ChaCha8Rng,
    file: &'static str,
    value: &'static str,
    lead: &[&str],
    count: usize,
    years: (i32, i32),
    shape: impl Fn(f64, f64) -> f64,
    noise: f64,
) -> Dataset {
    let mut rows = Vec::new();
    for i in 0..count {
        let name = lead
            .get(i)
            .map(|s| s.to_string())
            .unwrap_or_else(|| format!("Country {i:03}"));
        let code = entity_code(&name, i);
        // Entity-specific start (later joiners) and timing offset.
        let start = years.0
            + if i < lead.len() {
                0
            } else {
                rng.random_range(0..=10)
            };
        let offset: f64 = rng.random_range(-0.15..0.15);
        let n = (years.1 - start + 1) as usize;
        let e = ar1(rng, n, 0.8, noise);
        for (k, y) in (start..=years.1).enumerate() {
            let t = (y - years.0) as f64 / (years.1 - years.0) as f64;
            let v = shape(t, offset) * (1.0 + e[k]);
            rows.push((name.clone(), code.clone(), y, v.max(0.0)));
        }
    }
    Dataset { file, value, rows }
}

fn datasets(rng: &mut ChaCha8Rng) -> Vec<Dataset> {
    vec![
        dataset(
            rng,
            "life-expectancy.csv",
            "life_expectancy",
            &["Costa Rica"],
            8,
            (1800, 2000),
            |t, o| 30.0 + 47.0 * logistic(t, 0.7 + 0.3 * o, 14.0),
            0.01,
        ),
        dataset(
            rng,
            "aquaculture-production.csv",
            "aquaculture_tonnes",
            &["World"],
            6,
            (1960, 2000),
            |t, o| 1e6 * (3.5 * (t - o).max(-0.5)).exp(),
            0.04,
        ),
        dataset(
            rng,
            "population.csv",
            "population",
            &["Uganda"],
            8,
            (1800, 2000),
            |t, o| 1e6 * (0.5 + (3.2 * t + o).exp()),
            0.005,
        ),
        dataset(
            rng,
            "tractors.csv",
            "tractors",
            &["OECD members"],
            6,
            (1961, 2000),
            |t, o| 1e6 * (2.0 + 8.0 * logistic(t, 0.3 + o, 8.0)),
            0.02,
        ),
        dataset(
            rng,
            "palm-oil-production.csv",
            "palm_oil_tonnes",
            &["World"],
            6,
            (1961, 2000),
            |t, o| 1e6 * (1.0 + 15.0 * t * t + o),
            0.04,
        ),
        dataset(
            rng,
            "livestock-slaughtered.csv",
            "animals_slaughtered",
            &["India"],
            6,
            (1961, 2000),
            |t, o| 1e7 * (4.0 + 6.0 * t + 2.0 * o),
            0.03,
        ),
        dataset(
            rng,
            "fixed-telephone-subscriptions.csv",
            "subscriptions_per_100",
            &[],
            115,
            (1960, 2000),
            |t, o| 2.0 + 50.0 * logistic(t, 0.6 + o, 7.0),
            0.03,
        ),
    ]
}

fn main() -> Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    fs::create_dir_all(dir.join("owid"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    let cols = study_columns(&mut rng);
    let refs: Vec<&Column> = cols.iter().collect();
    write_wide(&dir.join("study.csv"), &refs)?;
    write_wide(&dir.join("tightness.csv"), &refs[..1])?;

    for d in datasets(&mut rng) {
        let path = dir.join("owid").join(d.file);
        let mut w = csv::Writer::from_path(&path).with_context(|| path.display().to_string())?;
        w.write_record(["Entity", "Code", "Year", d.value])?;
        for (entity, code, year, v) in &d.rows {
            w.write_record([entity.as_str(), code, &year.to_string(), &format!("{v:.4}")])?;
        }
        w.flush()?;
    }
    println!("fixtures written to {}", dir.display());
    Ok(())
}
