//! Artifacts on disk: one CSV per table, JSON reports, `summary.json` after
//! every stage and `manifest.json` at the end.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

/// Floats print in shortest round-trip form, so equal values give equal bytes.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Table {
            name,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width in table {}", self.name);
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub id: String,
    /// Acceptance criterion number, when the check is one.
    pub criterion: Option<u8>,
    pub passed: bool,
    /// Only gating verdicts set the exit status.
    pub gating: bool,
    pub value: f64,
    pub threshold: String,
    pub detail: String,
}

impl Verdict {
    pub fn criterion(n: u8, id: &str, passed: bool, value: f64, threshold: impl Into<String>, detail: impl Into<String>) -> Self {
        Verdict {
            id: id.into(),
            criterion: Some(n),
            passed,
            gating: true,
            value,
            threshold: threshold.into(),
            detail: detail.into(),
        }
    }

    pub fn check(id: &str, passed: bool, gating: bool, value: f64, threshold: impl Into<String>, detail: impl Into<String>) -> Self {
        Verdict {
            id: id.into(),
            criterion: None,
            passed,
            gating,
            value,
            threshold: threshold.into(),
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        let tag = match self.criterion {
            Some(n) => format!("criterion {n:>2}"),
            None => "check".to_string(),
        };
        let mark = if self.passed { "PASS" } else { "FAIL" };
        format!("{mark} {tag} {}: {} (threshold {}) {}", self.id, num(self.value), self.threshold, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub command: String,
    pub complete: bool,
    pub passed: bool,
    pub verdicts: Vec<Verdict>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub krick_version: String,
    pub rustc: Option<String>,
    pub config: RunConfig,
    pub wall_time_s: f64,
    pub stage_times_s: BTreeMap<String, f64>,
    pub capped_fraction: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
}

/// Writes as it goes so an interrupted run leaves everything finished so far.
pub struct Artifacts {
    pub dir: PathBuf,
    pub outputs: Vec<String>,
    pub verdicts: Vec<Verdict>,
    command: String,
}

impl Artifacts {
    pub fn create(dir: &Path, command: &str) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
            verdicts: Vec::new(),
            command: command.into(),
        })
    }

    fn note(&mut self, file: String) {
        if !self.outputs.contains(&file) {
            self.outputs.push(file);
        }
    }

    pub fn table(&mut self, t: &Table) -> Result<()> {
        let file = format!("{}.csv", t.name);
        let path = self.dir.join(&file);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(&t.header)?;
        for r in &t.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.note(file);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let file = format!("{name}.json");
        write_json(&self.dir.join(&file), value)?;
        self.note(file);
        Ok(())
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().filter(|v| v.gating).all(|v| v.passed)
    }

    pub fn summary(&mut self, complete: bool) -> Result<()> {
        let s = Summary {
            command: self.command.clone(),
            complete,
            passed: self.passed(),
            verdicts: self.verdicts.clone(),
        };
        write_json(&self.dir.join("summary.json"), &s)?;
        self.note("summary.json".into());
        Ok(())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
