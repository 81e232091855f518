//! Experiment results and their CSV, JSON and SVG renderings.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use pdmp_core::{Error, Result};

use crate::config::ExperimentConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Numeric table; every cell is finite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Numerical(format!(
                "table {}: row of {} cells for {} columns",
                self.name,
                row.len(),
                self.columns.len()
            )));
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "table {}: non-finite cell {v}",
                self.name
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// One pass/fail comparison against an acceptance threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub version: &'static str,
    pub config: ExperimentConfig,
    /// The first table is the main series.
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    /// Scalar results (fitted slopes and the like), in insertion order.
    pub scalars: Vec<(String, f64)>,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            experiment: config.experiment.to_string(),
            version: VERSION,
            config: config.clone(),
            tables: Vec::new(),
            checks: Vec::new(),
            scalars: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn header(&self) -> String {
        let mut s = format!("# pdmp-lab {}\n", self.version);
        for (k, v) in self.config.entries() {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s
    }

    /// CSV text of one table, preceded by the resolved config as comments.
    pub fn csv(&self, table: &Table) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Usage(format!("csv: {e}"));
        w.write_record(&table.columns).map_err(io)?;
        for row in &table.rows {
            // Debug keeps the shortest round-trip digits and switches to exponent
            // notation for tiny values such as the atom bound
            w.write_record(row.iter().map(|v| format!("{v:?}"))).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Usage(format!("csv: {e}")))?;
        Ok(self.header() + &String::from_utf8_lossy(&bytes))
    }

    pub fn json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|s| s + "\n")
            .map_err(|e| Error::Usage(format!("json: {e}")))
    }

    fn file_stem(&self, table: &Table, index: usize) -> String {
        if index == 0 {
            self.experiment.clone()
        } else {
            format!("{}-{}", self.experiment, table.name)
        }
    }

    /// Writes the artifacts selected by the config; returns their paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let io = |p: &Path, e: std::io::Error| Error::Usage(format!("{}: {e}", p.display()));
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut written = Vec::new();
        let mut put = |name: String, body: String| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| io(&path, e))?;
            written.push(path);
            Ok(())
        };
        if self.config.format.csv() {
            for (i, t) in self.tables.iter().enumerate() {
                put(format!("{}.csv", self.file_stem(t, i)), self.csv(t)?)?;
            }
        }
        if self.config.format.json() {
            put(format!("{}.json", self.experiment), self.json()?)?;
        }
        if self.config.svg {
            if let Some(t) = self.tables.first() {
                if let Some(svg) = crate::svg::line_plot(t, &self.experiment) {
                    put(format!("{}.svg", self.experiment), svg)?;
                }
            }
        }
        Ok(written)
    }
}
