//! Flat, versioned output rows and their two encodings: JSON lines
//! (`record`) and CSV (`table`).
//!
//! Every row carries a `schema` field naming its row type and version, e.g.
//! `bounds/1`. Rows are flat so that both encodings hold the same data;
//! list-valued fields are space-separated strings.

use std::fmt;
use std::io::{self, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Format {
    /// One JSON object per line.
    #[default]
    Record,
    /// CSV with a header row.
    Table,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Record => "jsonl",
            Format::Table => "csv",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "record" | "structured-record" | "jsonl" => Ok(Format::Record),
            "table" | "delimited-table" | "csv" => Ok(Format::Table),
            other => Err(format!(
                "unknown format '{other}', expected record or table"
            )),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Format::Record => write!(f, "record"),
            Format::Table => write!(f, "table"),
        }
    }
}

pub fn schema(kind: &str) -> String {
    format!("{kind}/{SCHEMA_VERSION}")
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub fn write_rows<W: Write, T: Serialize>(
    out: W,
    format: Format,
    rows: &[T],
) -> Result<(), ReportError> {
    match format {
        Format::Record => {
            let mut out = out;
            for row in rows {
                serde_json::to_writer(&mut out, row)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
        Format::Table => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn render_rows<T: Serialize>(format: Format, rows: &[T]) -> Result<String, ReportError> {
    let mut buf = Vec::new();
    write_rows(&mut buf, format, rows)?;
    Ok(String::from_utf8(buf).expect("serializers emit UTF-8"))
}

pub fn parse_rows<T: DeserializeOwned>(format: Format, text: &str) -> Result<Vec<T>, ReportError> {
    match format {
        Format::Record => text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(ReportError::from))
            .collect(),
        Format::Table => csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .map(|r| r.map_err(ReportError::from))
            .collect(),
    }
}

pub fn join<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub schema: String,
    pub task: String,
    pub parties: usize,
    pub classical_fidelity: f64,
    pub classical_success: f64,
    pub quantum_fidelity: f64,
    pub quantum_success: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyRow {
    pub schema: String,
    pub task: String,
    pub parties: usize,
    pub tree: String,
    pub max_fidelity: f64,
    pub closed_form: f64,
    pub search_space: u64,
    pub argmax_index: u64,
    /// Message tables, parties separated by `|`, entries by spaces.
    pub argmax_tables: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeRow {
    pub schema: String,
    pub parties: usize,
    pub grid: usize,
    pub restarts: usize,
    pub seed: u64,
    pub best_stream: u64,
    pub best_fidelity: f64,
    pub closed_form: f64,
    pub ratio: f64,
    pub all_traces_monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub schema: String,
    pub stream: u64,
    pub sweep: usize,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRow {
    pub schema: String,
    pub party: usize,
    /// Cell signs over the uniform grid on `[0, pi)`.
    pub signs: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub schema: String,
    pub task: String,
    pub parties: usize,
    pub seed: u64,
    pub streams: u64,
    pub trigger_rate: f64,
    pub window: f64,
    pub eta: f64,
    pub visibility: f64,
    pub gamma: f64,
    pub windows: u64,
    pub n: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub sigma: f64,
    pub predicted: f64,
    pub classical_success: f64,
    pub violation: f64,
}

/// One collection window of the simulated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub schema: String,
    pub seed: u64,
    pub stream: u64,
    pub inputs: String,
    pub trigger_count: u64,
    pub accepted: bool,
    pub detected: bool,
    pub guessed: bool,
    pub answer: i8,
    pub truth: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub schema: String,
    pub block_size: usize,
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub schema: String,
    pub id: String,
    pub name: String,
    pub observed: String,
    pub expected: String,
    pub pass: bool,
}
