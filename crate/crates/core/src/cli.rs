//! Command-line interface: argument definitions, config resolution and the
//! command runners. `main` only maps results to exit codes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::audit::{
    emit_report, replicate_table1, run_catalog_audit, run_dynreg_validation, run_joint_audit,
    run_simulation_audit, AuditOptions, AuditRow, Mode, Report, ReportFormat, ValidationOptions,
};
use crate::detrend::loess_smooth;
use crate::error::{Error, Result};
use crate::ingest::{
    load_catalog, load_series, load_study, Catalog, CatalogSchema, Provenance, StudyBundle,
    DEFAULT_MIN_OVERLAP,
};
use crate::series::TimeSeries;
use crate::simgen::{gen_batch, GeneratorParams, GeneratorSpec, SeriesClass};
use crate::tscore::{KendallOptions, DEFAULT_EXACT_CUTOFF, MAX_EXACT_CUTOFF};

/// Environment variable naming the default fixture directory.
pub const FIXTURES_ENV: &str = "SPURIOUS_FIXTURES";
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_COUNT: usize = 1000;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Default replication-table predictors: dataset file and entity.
pub const DEFAULT_PREDICTORS: [(&str, &str); 6] = [
    ("life-expectancy", "Costa Rica"),
    ("aquaculture-production", "World"),
    ("population", "Uganda"),
    ("tractors", "OECD members"),
    ("palm-oil-production", "World"),
    ("livestock-slaughtered", "India"),
];

#[derive(Debug, Parser)]
#[command(
    name = "spurious",
    version,
    about = "Spurious-correlation audits for annual time series",
    long_about = "Spurious-correlation audits for annual time series.\n\n\
        Reads only local files. Reports go to --out (written atomically) or standard output; \
        logs go to standard error (set RUST_LOG=info for progress).\n\n\
        Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a batch of synthetic series as long-format CSV.
    Simulate(SimulateArgs),
    /// Correlate generated series with a target and report significance rates.
    AuditSim(AuditSimArgs),
    /// Correlate every catalog series with a target, per dataset.
    AuditCatalog(AuditCatalogArgs),
    /// Residual correlations of the creativity/order measures with predictors.
    Table1(Table1Args),
    /// Dynamic regression of each study measure on tightness.
    Dynreg(DynregArgs),
    /// Load the study and catalog files and print an inventory.
    IngestCheck(IngestCheckArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML file with defaults for seed, count, alpha, mode, min_overlap, span, exact_cutoff, workers, fixtures and [generator]; flags win.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Fixture directory [default: fixtures]
    #[arg(long, value_name = "DIR", env = FIXTURES_ENV)]
    pub fixtures: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Worker threads [default: available parallelism]
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: Option<u32>,
    /// Largest tie-free sample size given an exact P-value [default: 9, max 20]
    #[arg(long, value_name = "N")]
    pub exact_cutoff: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GeneratorArgs {
    /// Shock standard deviation [default: 1]
    #[arg(long)]
    pub noise_scale: Option<f64>,
    /// Smallest drift magnitude for rw_drift [default: 0.1]
    #[arg(long)]
    pub drift_min: Option<f64>,
    /// Largest drift magnitude for rw_drift [default: 0.3]
    #[arg(long)]
    pub drift_max: Option<f64>,
    /// Largest per-step slope for linear_trend [default: 0.07]
    #[arg(long)]
    pub slope_max: Option<f64>,
    /// AR(1) coefficient of linear_trend noise [default: 0.3]
    #[arg(long)]
    pub linear_noise_ar: Option<f64>,
    /// Smallest nonlinear_trend amplitude [default: 14]
    #[arg(long)]
    pub amplitude_min: Option<f64>,
    /// Largest nonlinear_trend amplitude [default: 36]
    #[arg(long)]
    pub amplitude_max: Option<f64>,
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let a: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err(format!("alpha must lie in (0, 1), got {a}"))
    }
}

fn parse_class(s: &str) -> std::result::Result<SeriesClass, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> std::result::Result<ReportFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Raw,
    #[value(name = "ols_residual")]
    OlsResidual,
    Both,
}

impl ModeArg {
    fn modes(self) -> Vec<Mode> {
        match self {
            ModeArg::Raw => vec![Mode::Raw],
            ModeArg::OlsResidual => vec![Mode::OlsResidual],
            ModeArg::Both => vec![Mode::Raw, Mode::OlsResidual],
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// white_noise, rw_drift, rw_plain, linear_trend or nonlinear_trend
    #[arg(long, value_parser = parse_class)]
    pub class: SeriesClass,
    /// Series to generate [default: 1000]
    #[arg(long)]
    pub count: Option<usize>,
    /// Master seed [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Years per series
    #[arg(long, default_value_t = crate::simgen::DEFAULT_LENGTH)]
    pub length: usize,
    /// First year
    #[arg(long, default_value_t = crate::simgen::DEFAULT_START_YEAR, allow_hyphen_values = true)]
    pub start_year: i32,
    /// Add a loess-smoothed column with this span, a fraction of the points [default: off; 0.3 when given without a value]
    #[arg(long, num_args = 0..=1, default_missing_value = "0.3")]
    pub span: Option<f64>,
    #[command(flatten)]
    pub generator: GeneratorArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AuditSimArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Series class, repeatable [default: all five]
    #[arg(long = "class", value_parser = parse_class)]
    pub classes: Vec<SeriesClass>,
    /// Series per class [default: 1000]
    #[arg(long)]
    pub count: Option<usize>,
    /// Master seed [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Significance level in (0, 1) [default: 0.05]
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: Option<f64>,
    /// Correlation mode [default: raw]
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Target series CSV (year plus one column) [default: FIXTURES/tightness.csv]
    #[arg(long, value_name = "FILE")]
    pub target: Option<PathBuf>,
    /// Study CSV supplying the covariates [default: FIXTURES/study.csv]
    #[arg(long, value_name = "FILE")]
    pub study: Option<PathBuf>,
    /// csv, json or svg_bar
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: ReportFormat,
    /// Also write every individual test (label,mode,series,tau,p,n) here.
    #[arg(long, value_name = "FILE")]
    pub results: Option<PathBuf>,
    #[command(flatten)]
    pub generator: GeneratorArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AuditCatalogArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Long-format catalog CSV, repeatable; dataset name is the file stem [default: FIXTURES/owid/*.csv]
    #[arg(long = "catalog", value_name = "FILE")]
    pub catalogs: Vec<PathBuf>,
    /// Target series CSV [default: FIXTURES/tightness.csv]
    #[arg(long, value_name = "FILE")]
    pub target: Option<PathBuf>,
    /// Study CSV supplying the covariates [default: FIXTURES/study.csv]
    #[arg(long, value_name = "FILE")]
    pub study: Option<PathBuf>,
    /// Significance level in (0, 1) [default: 0.05]
    #[arg(long, value_parser = parse_alpha)]
    pub alpha: Option<f64>,
    /// Correlation mode [default: raw]
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Minimum common years for a series to be tested [default: 10]
    #[arg(long)]
    pub min_overlap: Option<usize>,
    /// csv, json or svg_bar
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: ReportFormat,
    /// Also write every individual test (label,mode,series,tau,p,n) here.
    #[arg(long, value_name = "FILE")]
    pub results: Option<PathBuf>,
    /// Also tally, per series, significant associations with the eight creativity/order measures and write the JSON summary here.
    #[arg(long, value_name = "FILE")]
    pub joint: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Table1Args {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Study CSV [default: FIXTURES/study.csv]
    #[arg(long, value_name = "FILE")]
    pub study: Option<PathBuf>,
    /// Extra predictor as CATALOG_FILE:ENTITY, repeatable [default: six bundled excerpts]
    #[arg(long = "predictor", value_name = "FILE:ENTITY")]
    pub predictors: Vec<String>,
    /// csv or json
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Args)]
pub struct DynregArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Study CSV [default: FIXTURES/study.csv]
    #[arg(long, value_name = "FILE")]
    pub study: Option<PathBuf>,
    /// Seed of the positive-control noise [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Widest interior gap in years that is interpolated
    #[arg(long, default_value_t = 2)]
    pub max_gap: usize,
    /// csv or json
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Args)]
pub struct IngestCheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Study CSV [default: FIXTURES/study.csv]
    #[arg(long, value_name = "FILE")]
    pub study: Option<PathBuf>,
    /// Long-format catalog CSV, repeatable [default: FIXTURES/owid/*.csv]
    #[arg(long = "catalog", value_name = "FILE")]
    pub catalogs: Vec<PathBuf>,
}

/// Values a `--config` TOML file may set.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub count: Option<usize>,
    pub alpha: Option<f64>,
    pub mode: Option<ModeArg>,
    pub min_overlap: Option<usize>,
    pub span: Option<f64>,
    pub exact_cutoff: Option<usize>,
    pub workers: Option<u32>,
    pub fixtures: Option<PathBuf>,
    pub generator: Option<GeneratorParams>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text)
            .map_err(|e| Error::input(format!("config {}: {}", path.display(), e.message())))
    }
}

/// Fully resolved settings: defaults, then the config file, then flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub seed: u64,
    pub count: usize,
    pub alpha: f64,
    pub modes: Vec<Mode>,
    pub classes: Vec<SeriesClass>,
    pub fixtures: PathBuf,
    pub target: PathBuf,
    pub study: PathBuf,
    pub catalogs: Vec<PathBuf>,
    pub out: Option<PathBuf>,
    pub results: Option<PathBuf>,
    pub joint: Option<PathBuf>,
    pub generator: GeneratorParams,
    pub length: usize,
    pub start_year: i32,
    pub min_overlap: usize,
    pub span: Option<f64>,
    pub exact_cutoff: usize,
    pub workers: Option<usize>,
    pub max_gap: usize,
    pub predictors: Vec<String>,
    #[serde(skip)]
    pub format: ReportFormat,
}

fn apply_generator(mut p: GeneratorParams, g: &GeneratorArgs) -> GeneratorParams {
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut p.noise_scale, g.noise_scale);
    set(&mut p.drift_min, g.drift_min);
    set(&mut p.drift_max, g.drift_max);
    set(&mut p.slope_max, g.slope_max);
    set(&mut p.linear_noise_ar, g.linear_noise_ar);
    set(&mut p.amplitude_min, g.amplitude_min);
    set(&mut p.amplitude_max, g.amplitude_max);
    p
}

impl RunConfig {
    /// Resolves and validates the configuration for `cli`. Errors here are
    /// usage errors.
    pub fn resolve(cli: &Cli) -> Result<Self> {
        let common = match &cli.command {
            Command::Simulate(a) => &a.common,
            Command::AuditSim(a) => &a.common,
            Command::AuditCatalog(a) => &a.common,
            Command::Table1(a) => &a.common,
            Command::Dynreg(a) => &a.common,
            Command::IngestCheck(a) => &a.common,
        };
        let file = match &common.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let fixtures = common
            .fixtures
            .clone()
            .or(file.fixtures.clone())
            .unwrap_or_else(|| PathBuf::from("fixtures"));
        let mut cfg = RunConfig {
            command: "",
            seed: file.seed.unwrap_or(DEFAULT_SEED),
            count: file.count.unwrap_or(DEFAULT_COUNT),
            alpha: file.alpha.unwrap_or(DEFAULT_ALPHA),
            modes: file.mode.unwrap_or(ModeArg::Raw).modes(),
            classes: SeriesClass::ALL.to_vec(),
            target: fixtures.join("tightness.csv"),
            study: fixtures.join("study.csv"),
            catalogs: Vec::new(),
            out: common.out.clone(),
            results: None,
            joint: None,
            generator: file.generator.unwrap_or_default(),
            length: crate::simgen::DEFAULT_LENGTH,
            start_year: crate::simgen::DEFAULT_START_YEAR,
            min_overlap: file.min_overlap.unwrap_or(DEFAULT_MIN_OVERLAP),
            span: file.span,
            exact_cutoff: common
                .exact_cutoff
                .or(file.exact_cutoff)
                .unwrap_or(DEFAULT_EXACT_CUTOFF),
            workers: common.workers.or(file.workers).map(|w| w as usize),
            max_gap: 2,
            predictors: Vec::new(),
            format: ReportFormat::Csv,
            fixtures,
        };
        let default_catalogs = |fixtures: &Path| -> Result<Vec<PathBuf>> {
            let dir = fixtures.join("owid");
            let mut files: Vec<PathBuf> = fs::read_dir(&dir)
                .map_err(|e| Error::input(format!("cannot list {}: {e}", dir.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            files.sort();
            Ok(files)
        };

        match &cli.command {
            Command::Simulate(a) => {
                cfg.command = "simulate";
                cfg.classes = vec![a.class];
                cfg.count = a.count.unwrap_or(cfg.count);
                cfg.seed = a.seed.unwrap_or(cfg.seed);
                cfg.length = a.length;
                cfg.start_year = a.start_year;
                cfg.span = a.span.or(cfg.span);
                cfg.generator = apply_generator(cfg.generator, &a.generator);
            }
            Command::AuditSim(a) => {
                cfg.command = "audit-sim";
                if !a.classes.is_empty() {
                    cfg.classes = a.classes.clone();
                }
                cfg.count = a.count.unwrap_or(cfg.count);
                cfg.seed = a.seed.unwrap_or(cfg.seed);
                cfg.alpha = a.alpha.unwrap_or(cfg.alpha);
                if let Some(m) = a.mode {
                    cfg.modes = m.modes();
                }
                cfg.target = a.target.clone().unwrap_or(cfg.target);
                cfg.study = a.study.clone().unwrap_or(cfg.study);
                cfg.format = a.format;
                cfg.results = a.results.clone();
                cfg.generator = apply_generator(cfg.generator, &a.generator);
            }
            Command::AuditCatalog(a) => {
                cfg.command = "audit-catalog";
                cfg.catalogs = if a.catalogs.is_empty() {
                    default_catalogs(&cfg.fixtures)?
                } else {
                    a.catalogs.clone()
                };
                cfg.target = a.target.clone().unwrap_or(cfg.target);
                cfg.study = a.study.clone().unwrap_or(cfg.study);
                cfg.alpha = a.alpha.unwrap_or(cfg.alpha);
                if let Some(m) = a.mode {
                    cfg.modes = m.modes();
                }
                cfg.min_overlap = a.min_overlap.unwrap_or(cfg.min_overlap);
                cfg.format = a.format;
                cfg.results = a.results.clone();
                cfg.joint = a.joint.clone();
            }
            Command::Table1(a) => {
                cfg.command = "table1";
                cfg.study = a.study.clone().unwrap_or(cfg.study);
                cfg.predictors = if a.predictors.is_empty() {
                    DEFAULT_PREDICTORS
                        .iter()
                        .map(|(file, entity)| {
                            let path = cfg.fixtures.join("owid").join(format!("{file}.csv"));
                            format!("{}:{entity}", path.display())
                        })
                        .collect()
                } else {
                    a.predictors.clone()
                };
                cfg.format = a.format;
            }
            Command::Dynreg(a) => {
                cfg.command = "dynreg";
                cfg.study = a.study.clone().unwrap_or(cfg.study);
                cfg.seed = a.seed.unwrap_or(cfg.seed);
                cfg.max_gap = a.max_gap;
                cfg.format = a.format;
            }
            Command::IngestCheck(a) => {
                cfg.command = "ingest-check";
                cfg.study = a.study.clone().unwrap_or(cfg.study);
                cfg.catalogs = if a.catalogs.is_empty() {
                    default_catalogs(&cfg.fixtures)?
                } else {
                    a.catalogs.clone()
                };
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::input(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.count == 0 {
            return Err(Error::input("count must be >= 1"));
        }
        if self.min_overlap < 3 {
            return Err(Error::input("min_overlap must be >= 3"));
        }
        if self.exact_cutoff > MAX_EXACT_CUTOFF {
            return Err(Error::input(format!(
                "exact_cutoff must be <= {MAX_EXACT_CUTOFF}, got {}",
                self.exact_cutoff
            )));
        }
        if let Some(s) = self.span {
            if !(s > 0.0 && s <= 1.0) {
                return Err(Error::input(format!("span must lie in (0, 1], got {s}")));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::input("workers must be >= 1"));
        }
        if self.format == ReportFormat::SvgBar && matches!(self.command, "table1" | "dynreg") {
            return Err(Error::input("svg_bar output is only available for audits"));
        }
        let spec = GeneratorSpec {
            params: self.generator,
            length: self.length,
            start_year: self.start_year,
            ..GeneratorSpec::new(SeriesClass::WhiteNoise, self.seed)
        };
        spec.validate()
    }

    fn kendall(&self) -> KendallOptions {
        KendallOptions {
            exact_cutoff: self.exact_cutoff,
        }
    }

    fn audit_options(&self, mode: Mode) -> AuditOptions {
        AuditOptions {
            alpha: self.alpha,
            mode,
            kendall: self.kendall(),
            min_overlap: self.min_overlap,
            workers: self.workers,
            ..AuditOptions::default()
        }
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, or to standard output.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            fs::create_dir_all(&dir)?;
            let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| Error::Io(e.error))?;
            Ok(())
        }
    }
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn study(path: &Path) -> Result<StudyBundle> {
    load_study(open(path)?)
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Loads and merges long-format catalog files.
pub fn load_catalogs(paths: &[PathBuf]) -> Result<Catalog> {
    let mut catalog = Catalog::default();
    for p in paths {
        let provenance = Provenance {
            source_file: p.display().to_string(),
            snapshot_date: None,
            citation: None,
        };
        let part = load_catalog(
            open(p)?,
            &CatalogSchema::default(),
            &dataset_name(p),
            provenance,
        )?;
        for r in &part.report.rejected {
            log::warn!("{}: rejected {}: {}", r.dataset, r.entity, r.reason);
        }
        catalog.merge(part)?;
    }
    Ok(catalog)
}

/// `FILE:ENTITY` as a single series named `dataset:entity`.
fn predictor(spec: &str) -> Result<TimeSeries> {
    let (file, entity) = spec
        .rsplit_once(':')
        .ok_or_else(|| Error::input(format!("predictor {spec:?} is not FILE:ENTITY")))?;
    let path = Path::new(file);
    let catalog = load_catalogs(&[path.to_path_buf()])?;
    let name = dataset_name(path);
    let s = catalog
        .get(&name, entity)
        .ok_or_else(|| Error::input(format!("no entity {entity:?} in {file}")))?;
    Ok(s.clone().with_id(format!("{name}:{entity}")))
}

fn render(report: Report<'_>, format: ReportFormat) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    emit_report(report, format, &mut buf)?;
    Ok(buf)
}

fn results_csv(rows: &[AuditRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "mode", "series", "tau", "p", "n"])?;
    for row in rows {
        for r in row.results.records()? {
            w.write_record([
                row.label.clone(),
                row.mode.to_string(),
                r.series,
                format!("{}", r.tau),
                format!("{}", r.p),
                r.n.to_string(),
            ])?;
        }
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Runs a resolved configuration.
pub fn run(cfg: &RunConfig) -> Result<()> {
    log::info!("running {} with {:?}", cfg.command, cfg);
    match cfg.command {
        "simulate" => run_simulate(cfg),
        "audit-sim" => run_audit_sim(cfg),
        "audit-catalog" => run_audit_catalog(cfg),
        "table1" => run_table1(cfg),
        "dynreg" => run_dynreg(cfg),
        "ingest-check" => run_ingest_check(cfg),
        other => Err(Error::input(format!("unknown command {other}"))),
    }
}

fn run_simulate(cfg: &RunConfig) -> Result<()> {
    let spec = GeneratorSpec {
        params: cfg.generator,
        length: cfg.length,
        start_year: cfg.start_year,
        ..GeneratorSpec::new(cfg.classes[0], cfg.seed)
    };
    let batch = gen_batch(&spec, cfg.count)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["series", "year", "value"];
    if cfg.span.is_some() {
        header.push("smooth");
    }
    w.write_record(&header)?;
    for s in &batch {
        let smooth = match cfg.span {
            Some(span) => Some(loess_smooth(s, span)?),
            None => None,
        };
        for (i, (year, v)) in s.years().iter().zip(s.values()).enumerate() {
            let mut rec = vec![s.id().to_string(), year.to_string(), format!("{v}")];
            if let Some(sm) = &smooth {
                rec.push(format!("{}", sm.values()[i]));
            }
            w.write_record(&rec)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_output(cfg.out.as_deref(), &bytes)
}

fn covariates_for(cfg: &RunConfig) -> Result<Vec<TimeSeries>> {
    if cfg.modes.contains(&Mode::OlsResidual) {
        Ok(study(&cfg.study)?.covariates())
    } else {
        Ok(Vec::new())
    }
}

fn run_audit_sim(cfg: &RunConfig) -> Result<()> {
    let target = load_series(open(&cfg.target)?, None)?;
    let covariates = covariates_for(cfg)?;
    let mut rows = Vec::new();
    for &mode in &cfg.modes {
        for &class in &cfg.classes {
            let spec = GeneratorSpec {
                params: cfg.generator,
                ..GeneratorSpec::matching(class, cfg.seed, &target)
            };
            let row = run_simulation_audit(
                &target,
                &spec,
                cfg.count,
                &covariates,
                &cfg.audit_options(mode),
            )?;
            log::info!("{class} {mode}: {:.4}", row.pct_significant);
            rows.push(row);
        }
    }
    if let Some(path) = &cfg.results {
        write_output(Some(path), &results_csv(&rows)?)?;
    }
    write_output(
        cfg.out.as_deref(),
        &render(Report::Rows(&rows), cfg.format)?,
    )
}

fn run_audit_catalog(cfg: &RunConfig) -> Result<()> {
    let target = load_series(open(&cfg.target)?, None)?;
    let catalog = load_catalogs(&cfg.catalogs)?;
    let covariates = covariates_for(cfg)?;
    let mut rows = Vec::new();
    for &mode in &cfg.modes {
        rows.extend(run_catalog_audit(
            &target,
            &catalog,
            &covariates,
            &cfg.audit_options(mode),
        )?);
    }
    if let Some(path) = &cfg.results {
        write_output(Some(path), &results_csv(&rows)?)?;
    }
    if let Some(path) = &cfg.joint {
        let bundle = study(&cfg.study)?;
        let mode = *cfg.modes.last().unwrap_or(&Mode::OlsResidual);
        let summary = run_joint_audit(
            &bundle.creativity_order,
            &catalog,
            &bundle.covariates(),
            &cfg.audit_options(mode),
        )?;
        let mut bytes = serde_json::to_vec_pretty(&summary)?;
        bytes.push(b'\n');
        write_output(Some(path), &bytes)?;
    }
    write_output(
        cfg.out.as_deref(),
        &render(Report::Rows(&rows), cfg.format)?,
    )
}

fn run_table1(cfg: &RunConfig) -> Result<()> {
    let bundle = study(&cfg.study)?;
    let mut predictors = vec![bundle.tightness.clone()];
    for p in &cfg.predictors {
        predictors.push(predictor(p)?);
    }
    let table = replicate_table1(&bundle, &predictors, &cfg.kendall())?;
    write_output(
        cfg.out.as_deref(),
        &render(Report::Cells(&table.flat()), cfg.format)?,
    )
}

fn run_dynreg(cfg: &RunConfig) -> Result<()> {
    let bundle = study(&cfg.study)?;
    let opts = ValidationOptions {
        max_gap: cfg.max_gap,
        control_seed: cfg.seed,
        ..ValidationOptions::default()
    };
    let rows = crate::audit::in_pool(cfg.workers, || run_dynreg_validation(&bundle, &opts))??;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!(
            "{failed} of {} regressions failed; see the error column",
            rows.len()
        );
    }
    write_output(
        cfg.out.as_deref(),
        &render(Report::Dynreg(&rows), cfg.format)?,
    )
}

#[derive(Serialize)]
struct StudyEntry {
    measure: String,
    observations: usize,
    first_year: i32,
    last_year: i32,
    gaps: Vec<(i32, i32)>,
}

fn run_ingest_check(cfg: &RunConfig) -> Result<()> {
    let bundle = study(&cfg.study)?;
    let measures: Vec<&TimeSeries> = std::iter::once(&bundle.tightness)
        .chain([&bundle.collectivism, &bundle.wealth])
        .chain(&bundle.convergent)
        .chain(&bundle.creativity_order)
        .collect();
    let entries: Vec<StudyEntry> = measures
        .into_iter()
        .map(|s| StudyEntry {
            measure: s.id().to_string(),
            observations: s.len(),
            first_year: s.first_year(),
            last_year: s.last_year(),
            gaps: s.gaps(),
        })
        .collect();
    let catalog = load_catalogs(&cfg.catalogs)?;
    let value = serde_json::json!({
        "study": entries,
        "catalog": catalog.manifest(),
    });
    let mut bytes = serde_json::to_vec_pretty(&value)?;
    bytes.push(b'\n');
    write_output(cfg.out.as_deref(), &bytes)
}
