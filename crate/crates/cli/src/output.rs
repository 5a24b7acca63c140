//! Deterministic CSV and manifest emission.
//!
//! Every CSV starts with a schema comment line so downstream tooling can
//! detect format drift; all floats are written as `{:.12e}` so re-running
//! an identical config reproduces byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub const SCHEMA_VERSION: &str = "1";

pub fn format_float(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.12e}")
}

/// One CSV under construction.
pub struct Csv {
    schema: String,
    header: String,
    rows: Vec<String>,
}

impl Csv {
    /// `schema` names the layout (e.g. "observables"), `header` the columns.
    pub fn new(schema: &str, units: &str, header: &str) -> Self {
        Csv {
            schema: format!("# schema={schema} version={SCHEMA_VERSION} units={units}"),
            header: header.to_string(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.rows.push(fields.join(","));
    }

    pub fn float_row(&mut self, values: &[f64]) {
        self.row(&values.iter().map(|&v| format_float(v)).collect::<Vec<_>>());
    }

    pub fn write(&self, path: &Path) -> Result<(), String> {
        let mut text = String::new();
        text.push_str(&self.schema);
        text.push('\n');
        text.push_str(&self.header);
        text.push('\n');
        for row in &self.rows {
            text.push_str(row);
            text.push('\n');
        }
        fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
    }
}

/// Outcome of one sweep point, recorded in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub label: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub files: Vec<String>,
    pub parameters: serde_json::Value,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema_version: String,
    pub experiment: String,
    pub code_version: String,
    pub wall_time_seconds: f64,
    pub points: Vec<PointRecord>,
}

impl Manifest {
    pub fn new(experiment: &str) -> Self {
        Manifest {
            schema_version: SCHEMA_VERSION.to_string(),
            experiment: experiment.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_seconds: 0.0,
            points: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, String> {
        let path = dir.join("manifest.json");
        let file = fs::File::create(&path)
            .map_err(|e| format!("cannot create {}: {e}", path.display()))?;
        let mut w = std::io::BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, self)
            .map_err(|e| format!("cannot serialize manifest: {e}"))?;
        w.write_all(b"\n").map_err(|e| format!("cannot write manifest: {e}"))?;
        Ok(path)
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))
}
