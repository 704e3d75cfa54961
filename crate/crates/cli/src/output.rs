//! Result tables and records, written as CSV or JSON.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};
use crate::quantity::format_number;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Everything needed to reproduce a number from the file that holds it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: String,
    pub config_hash: String,
    pub seed: u64,
    pub channel_mode: String,
    pub hover_time_policy: String,
    pub descent_credit: bool,
    pub compute_model: serde_json::Value,
}

impl Metadata {
    pub fn new(cfg: &RunConfig) -> Self {
        let energy = &cfg.problem.energy;
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            scenario: cfg.scenario.clone(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            channel_mode: cfg.sim.channel_mode.to_string(),
            hover_time_policy: energy.hover_time_policy.to_string(),
            descent_credit: energy.descent_credit,
            compute_model: serde_json::to_value(&cfg.problem.analysis.compute).unwrap_or_default(),
        }
    }

    fn columns() -> [&'static str; 4] {
        ["config_hash", "seed", "channel_mode", "hover_time_policy"]
    }

    fn cells(&self) -> [String; 4] {
        [
            self.config_hash.clone(),
            self.seed.to_string(),
            self.channel_mode.clone(),
            self.hover_time_policy.clone(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Num(x) => Some(x),
            Cell::Int(n) => Some(n as f64),
            _ => None,
        }
    }

    fn to_field(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W, meta: &Metadata) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<&str> = self
            .columns
            .iter()
            .map(String::as_str)
            .chain(Metadata::columns())
            .collect();
        w.write_record(&header)?;
        let tail = meta.cells();
        for row in &self.rows {
            let fields = row.iter().map(Cell::to_field).chain(tail.iter().cloned());
            w.write_record(fields)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W, meta: &Metadata, cfg: &RunConfig) -> Result<()> {
        #[derive(Serialize)]
        struct Doc<'a> {
            metadata: &'a Metadata,
            config: String,
            columns: &'a [String],
            rows: &'a [Vec<Cell>],
        }
        let doc = Doc {
            metadata: meta,
            config: cfg.to_text(),
            columns: &self.columns,
            rows: &self.rows,
        };
        serde_json::to_writer_pretty(out, &doc)?;
        Ok(())
    }

    pub fn write(&self, path: &Path, format: Format, cfg: &RunConfig) -> Result<()> {
        let meta = Metadata::new(cfg);
        let file = create(path)?;
        match format {
            Format::Csv => self.write_csv(file, &meta),
            Format::Json => self.write_json(file, &meta, cfg),
        }
    }
}

/// A single-run result with the config that produced it.
#[derive(Debug, Serialize)]
pub struct Record<'a, T: Serialize> {
    pub metadata: Metadata,
    pub config: String,
    pub result: &'a T,
}

impl<'a, T: Serialize> Record<'a, T> {
    pub fn new(cfg: &RunConfig, result: &'a T) -> Self {
        Self {
            metadata: Metadata::new(cfg),
            config: cfg.to_text(),
            result,
        }
    }
}

pub fn create(path: &Path) -> Result<fs::File> {
    let wrap = |source| HarnessError::Write {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(wrap)?;
    }
    fs::File::create(path).map_err(wrap)
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    let file = create(path)?;
    serde_json::to_writer_pretty(file, value)?;
    Ok(path.to_path_buf())
}
