//! CSV tables and run manifests.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub const SCHEMA: u32 = 1;

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn config_hash(config_json: &str) -> String {
    Sha256::digest(config_json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn git_describe() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: u32,
    subcommand: &'a str,
    config_sha256: String,
    seed: u64,
    git_describe: String,
    wall_time_s: f64,
    threads: usize,
    csv: String,
    config: &'a ExperimentConfig,
}

/// Writes `<name>.csv` (config embedded in a comment line) and
/// `<name>.manifest.json`. Returns the CSV path.
pub fn write_run(out: &Path, name: &str, config: &ExperimentConfig, table: &Table, wall_time_s: f64) -> Result<PathBuf> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let config_json = serde_json::to_string(config)?;
    let csv_path = out.join(format!("{name}.csv"));
    let mut file = File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    writeln!(file, "# schema={SCHEMA}")?;
    writeln!(file, "# config={config_json}")?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;

    let manifest = Manifest {
        schema: SCHEMA,
        subcommand: name,
        config_sha256: config_hash(&config_json),
        seed: config.seed,
        git_describe: git_describe(),
        wall_time_s,
        threads: rayon::current_num_threads(),
        csv: csv_path.file_name().unwrap().to_string_lossy().into_owned(),
        config,
    };
    let manifest_path = out.join(format!("{name}.manifest.json"));
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", manifest_path.display()))?;
    Ok(csv_path)
}
