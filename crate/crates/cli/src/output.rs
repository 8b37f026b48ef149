//! CSV and JSON artifacts.
//!
//! Every CSV row starts with `config_hash, version, schema, op_id`. Numbers
//! are written as `{:.12e}` so bodies are byte-reproducible.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

/// Bumped whenever a subcommand's CSV columns change.
pub const CSV_SCHEMA_VERSION: u32 = magspec_core::verify::CSV_SCHEMA_VERSION;
pub const JSON_SCHEMA_VERSION: u32 = 1;

pub const PREFIX: [&str; 4] = ["config_hash", "version", "schema", "op_id"];

pub fn num(v: f64) -> String {
    format!("{v:.12e}")
}

/// Columns after the common prefix, plus rows of formatted cells.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<(String, Vec<String>)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, op_id: impl Into<String>, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push((op_id.into(), cells));
    }

    pub fn render(&self, hash: &str) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<&str> = PREFIX.iter().chain(self.columns.iter()).copied().collect();
        w.write_record(&header)?;
        let schema = CSV_SCHEMA_VERSION.to_string();
        for (op, cells) in &self.rows {
            let mut rec = vec![
                hash,
                magspec_core::ARTIFACT_VERSION,
                schema.as_str(),
                op.as_str(),
            ];
            rec.extend(cells.iter().map(|s| s.as_str()));
            w.write_record(&rec)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

/// Failure of one task inside a subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct TaskError {
    pub task: String,
    pub error: String,
}

/// JSON summary written next to the CSV.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub csv_schema_version: u32,
    pub subcommand: String,
    pub config_hash: String,
    pub version: String,
    pub rows: usize,
    pub csv: String,
    pub elapsed_seconds: f64,
    pub errors: Vec<TaskError>,
    pub details: Value,
}

pub struct Artifacts {
    pub csv: PathBuf,
    pub json: PathBuf,
}

pub fn write(dir: &Path, name: &str, body: &str, summary: &Summary) -> Result<Artifacts> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv = dir.join(format!("{name}.csv"));
    let json = dir.join(format!("{name}.json"));
    std::fs::write(&csv, body).with_context(|| format!("writing {}", csv.display()))?;
    let text = serde_json::to_string_pretty(summary)?;
    std::fs::write(&json, text + "\n").with_context(|| format!("writing {}", json.display()))?;
    Ok(Artifacts { csv, json })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_carry_prefix() {
        let mut t = Table::new(&["a", "b"]);
        t.push("perturb", vec!["1".into(), num(0.5)]);
        let s = t.render("h").unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "config_hash,version,schema,op_id,a,b");
        assert_eq!(
            lines[1],
            format!(
                "h,{},{CSV_SCHEMA_VERSION},perturb,1,5.000000000000e-1",
                magspec_core::ARTIFACT_VERSION
            )
        );
    }
}
