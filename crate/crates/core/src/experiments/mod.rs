//! Reproduction drivers behind the `tfdsim` subcommands.
//!
//! Every run writes `<out>/<experiment>.csv` (plus `<experiment>_<table>.csv`
//! for secondary tables) and `<out>/<experiment>.meta.json`, a [`RunRecord`]
//! whose config echo is enough to run it again.

mod config;
mod gs;
mod hybrid;
mod mitigate;
mod noise;
mod tfd_sweep;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use config::{
    default_betas, Command, ExperimentConfig, FamilyName, GsConfig, HybridConfig, MeasuredEnergy, MitigateConfig,
    NoiseConfig, Overrides, StartMode, TfdSweepConfig,
};

use crate::error::{Error, Result};
use crate::optimize::MultistartOptions;

/// Row data destined for one CSV file. Cells are preformatted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Empty for the main table, otherwise the file suffix.
    pub suffix: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(suffix: &str, header: &[&str]) -> Self {
        Self {
            suffix: suffix.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn with_header(suffix: &str, header: Vec<String>) -> Self {
        Self {
            suffix: suffix.to_string(),
            header,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self, experiment: &str) -> String {
        if self.suffix.is_empty() {
            format!("{experiment}.csv")
        } else {
            format!("{experiment}_{}.csv", self.suffix)
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest decimal that reads back to the same `f64`; `inf` for infinity.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:?}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Result of a driver before it is written out.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub summary: BTreeMap<String, Value>,
}

impl Outcome {
    fn note(&mut self, key: impl Into<String>, value: impl Serialize) {
        self.summary.insert(
            key.into(),
            serde_json::to_value(value).expect("summary values serialize"),
        );
    }

    pub fn table(&self, suffix: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.suffix == suffix)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub artifact: String,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub config: ExperimentConfig,
    pub files: Vec<String>,
    pub summary: BTreeMap<String, Value>,
    pub provenance: Provenance,
}

impl RunRecord {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn meta_path(&self, out: &Path) -> PathBuf {
        out.join(format!("{}.meta.json", self.experiment))
    }
}

/// Runs `config` on a pool of `threads` workers (all cores when `None`).
pub fn execute(config: &ExperimentConfig, threads: Option<usize>) -> Result<Outcome> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Capability(format!("cannot start worker threads: {e}")))?;
    pool.install(|| match config {
        ExperimentConfig::TfdSweep(c) => tfd_sweep::run(c),
        ExperimentConfig::Gs(c) => gs::run(c),
        ExperimentConfig::Hybrid(c) => hybrid::run(c),
        ExperimentConfig::Noise(c) => noise::run(c),
        ExperimentConfig::Mitigate(c) => mitigate::run(c),
    })
}

/// Executes and writes the CSV tables and the meta file into `out`.
pub fn run_and_write(
    experiment: &str,
    preset: Option<&str>,
    config: &ExperimentConfig,
    out: &Path,
    threads: Option<usize>,
) -> Result<RunRecord> {
    let outcome = execute(config, threads)?;
    std::fs::create_dir_all(out)?;
    let mut files = Vec::new();
    for table in &outcome.tables {
        let name = table.file_name(experiment);
        table.write(&out.join(&name))?;
        files.push(name);
    }
    let record = RunRecord {
        experiment: experiment.to_string(),
        preset: preset.map(str::to_string),
        config: config.clone(),
        files,
        summary: outcome.summary,
        provenance: Provenance {
            artifact: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        },
    };
    let mut text = serde_json::to_string_pretty(&record)?;
    text.push('\n');
    std::fs::write(record.meta_path(out), text)?;
    Ok(record)
}

/// Resolves settings for `command` and runs them. The experiment id is the
/// preset name when one is given, else the command name.
pub fn run_command(
    command: Command,
    preset: Option<&str>,
    config_file: Option<&Path>,
    overrides: &Overrides,
    out: &Path,
    threads: Option<usize>,
) -> Result<RunRecord> {
    let config = ExperimentConfig::resolve(command, preset, config_file, overrides)?;
    let experiment = preset.unwrap_or(command.name());
    run_and_write(experiment, preset, &config, out, threads)
}

/// Runs the config echoed in a meta file again, writing into `out`.
pub fn rerun(meta: &Path, out: &Path, threads: Option<usize>) -> Result<RunRecord> {
    let record = RunRecord::load(meta)?;
    run_and_write(&record.experiment, record.preset.as_deref(), &record.config, out, threads)
}

fn multistart(restarts: usize, seed: u64) -> MultistartOptions {
    MultistartOptions {
        restarts,
        seed,
        ..MultistartOptions::default()
    }
}

fn angle_header(prefix: &[&str], names: &[String], suffix: &[&str]) -> Vec<String> {
    prefix
        .iter()
        .map(|s| s.to_string())
        .chain(names.iter().cloned())
        .chain(suffix.iter().map(|s| s.to_string()))
        .collect()
}
