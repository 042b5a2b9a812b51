use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Bumped whenever a column is renamed, reordered or removed.
pub const SCHEMA_VERSION: &str = "1";

/// Allowed values of the trailing `provenance` column.
pub const PROVENANCES: [&str; 3] = ["analytic", "mc", "exact"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub rng: String,
    pub workers: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub wall_time_seconds: f64,
    pub version: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub schema_version: String,
    pub command: String,
    /// Parsed options plus the raw argument list that regenerates this output.
    pub config: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub metadata: Metadata,
}

/// Rows under construction; `provenance` is appended as the last column.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        let mut columns: Vec<String> = columns.iter().map(|c| c.to_string()).collect();
        columns.push("provenance".into());
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, mut cells: Vec<Value>, provenance: &str) {
        assert!(PROVENANCES.contains(&provenance), "unknown provenance {provenance}");
        assert_eq!(cells.len() + 1, self.columns.len(), "row width does not match the header");
        cells.push(Value::from(provenance));
        self.rows.push(cells);
    }
}

/// A float cell. Non-finite values have no JSON form and become empty cells.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        // serde_json prints floats in shortest round-trip form.
        other => other.to_string(),
    }
}

pub fn write_json(record: &OutputRecord, out: &mut dyn Write) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, record)?;
    writeln!(out)
}

/// CSV with the metadata as leading `#` comment lines.
pub fn write_csv(record: &OutputRecord, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "# schema_version: {}", record.schema_version)?;
    writeln!(out, "# command: {}", record.command)?;
    writeln!(out, "# seed: {}", record.metadata.seed)?;
    writeln!(out, "# rng: {}", record.metadata.rng)?;
    writeln!(out, "# workers: {}", record.metadata.workers)?;
    writeln!(out, "# tolerances: {}", serde_json::to_string(&record.metadata.tolerances)?)?;
    writeln!(out, "# wall_time_seconds: {}", record.metadata.wall_time_seconds)?;
    writeln!(out, "# version: {}", record.metadata.version)?;
    for note in &record.metadata.notes {
        writeln!(out, "# note: {note}")?;
    }
    writeln!(out, "# config: {}", serde_json::to_string(&record.config)?)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&record.columns)?;
    for row in &record.rows {
        w.write_record(row.iter().map(cell_text))?;
    }
    w.flush()
}
