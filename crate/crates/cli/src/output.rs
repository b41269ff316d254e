use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;

/// An asserted property of a run. A failing check makes the process exit 3.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value >= threshold }
    }

    pub fn flag(name: &str, pass: bool) -> Self {
        Self { name: name.into(), value: pass as u8 as f64, threshold: 1.0, pass }
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn float(v: f64) -> String {
    format!("{v:?}")
}

/// Comma-separated table with a header row.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { text: header.join(",") + "\n" }
    }

    pub fn cells<S: AsRef<str>>(&mut self, cells: &[S]) {
        let line: Vec<&str> = cells.iter().map(|c| c.as_ref()).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn row(&mut self, values: &[f64]) {
        let line: Vec<String> = values.iter().map(|&v| float(v)).collect();
        self.cells(&line);
    }

    pub fn from_text(text: String) -> Self {
        Self { text }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// What a subcommand produces.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub csv: Csv,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    /// Additional binary artifacts `(file name, bytes)`.
    pub extra: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    pub fn new(report: impl Serialize, csv: Csv) -> Self {
        Self {
            report: serde_json::to_value(report).expect("reports serialize"),
            csv,
            checks: Vec::new(),
            warnings: Vec::new(),
            extra: Vec::new(),
        }
    }

    pub fn check(mut self, c: Check) -> Self {
        self.checks.push(c);
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn summary(&self, command: &str, cfg: &RunConfig) -> Value {
        json!({
            "command": command,
            "config": cfg,
            "checks": self.checks,
            "warnings": self.warnings,
            "passed": self.passed(),
            "report": self.report,
        })
    }
}

/// Writes `<command>.json`, `<command>.csv` and any extra files into `dir`.
/// Nothing is left behind if a write fails.
pub fn write_artifacts(dir: &Path, command: &str, summary: &Value, outcome: &Outcome) -> Result<Vec<PathBuf>, CliError> {
    let io = |e: std::io::Error| CliError::Numerical(format!("writing artifacts to {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    let mut files: Vec<(PathBuf, &[u8])> = vec![
        (dir.join(format!("{command}.json")), text.as_bytes()),
        (dir.join(format!("{command}.csv")), outcome.csv.as_str().as_bytes()),
    ];
    files.extend(outcome.extra.iter().map(|(name, bytes)| (dir.join(name), bytes.as_slice())));
    let mut written = Vec::new();
    for (path, bytes) in files {
        if let Err(e) = std::fs::write(&path, bytes) {
            let _ = std::fs::remove_file(&path);
            for w in &written {
                let _ = std::fs::remove_file(w);
            }
            return Err(io(e));
        }
        written.push(path);
    }
    Ok(written)
}
