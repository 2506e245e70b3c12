//! CSV tables with JSON sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

use crate::spec::ExperimentSpec;

/// Constants fitted during a run; absent ones are written as `null`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Fitted {
    pub omega: Option<f64>,
    pub beta: Option<f64>,
    pub c: Option<f64>,
}

/// A header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

/// Shortest round-trip text of a float; identical bytes for identical values.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Outcome of one command: tables to write, fitted constants and a verdict.
#[derive(Debug, Clone)]
pub struct Report {
    pub tables: Vec<Table>,
    pub fitted: Fitted,
    pub summary: Value,
    pub truncation: Value,
    pub passed: bool,
}

impl Report {
    pub fn new(tables: Vec<Table>) -> Self {
        Report {
            tables,
            fitted: Fitted::default(),
            summary: json!({}),
            truncation: json!({}),
            passed: true,
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Writes `<name>.csv` and `<name>.json` for every table under `dir`.
    pub fn write(&self, dir: &Path, spec: &ExperimentSpec) -> anyhow::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut paths = Vec::new();
        for t in &self.tables {
            let csv_path = dir.join(format!("{}.csv", t.name));
            let mut w = csv::Writer::from_path(&csv_path)
                .with_context(|| format!("writing {}", csv_path.display()))?;
            w.write_record(&t.header)?;
            for r in &t.rows {
                w.write_record(r)?;
            }
            w.flush()?;
            let meta = json!({
                "table": t.name,
                "columns": t.header,
                "config": spec,
                "tolerances": spec.tolerances,
                "truncation": self.truncation,
                "fitted": self.fitted,
                "summary": self.summary,
                "passed": self.passed,
            });
            let json_path = dir.join(format!("{}.json", t.name));
            fs::write(&json_path, serde_json::to_string_pretty(&meta)? + "\n")?;
            paths.push(csv_path);
            paths.push(json_path);
        }
        Ok(paths)
    }
}
