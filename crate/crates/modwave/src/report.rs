//! `results.json` summary and CSV series.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use modwave_core::DecayFit;
use serde::Serialize;

use crate::config::{ConfigEcho, ExperimentConfig};
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// Acceptance bound on a scalar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    AtMost { limit: f64 },
    AtLeast { limit: f64 },
    Between { low: f64, high: f64 },
}

impl Bound {
    pub fn holds(self, value: f64) -> bool {
        match self {
            Bound::AtMost { limit } => value <= limit,
            Bound::AtLeast { limit } => value >= limit,
            Bound::Between { low, high } => value >= low && value <= high,
        }
    }
}

pub fn at_most(limit: f64) -> Bound {
    Bound::AtMost { limit }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    /// Acceptance criterion this check belongs to, if any.
    pub criterion: Option<u8>,
    pub value: f64,
    pub bound: Bound,
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Passed,
    Failed,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub subcommand: String,
    /// Seconds since the Unix epoch; the only nondeterministic field.
    pub timestamp_unix: u64,
    pub status: Status,
    pub reason: Option<String>,
    pub config: ConfigEcho,
    pub checks: Vec<Check>,
    pub fits: BTreeMap<String, DecayFit>,
    pub values: BTreeMap<String, serde_json::Value>,
}

impl Report {
    pub fn new(subcommand: &str, config: &ExperimentConfig) -> Self {
        let timestamp_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            schema_version: SCHEMA_VERSION,
            subcommand: subcommand.to_string(),
            timestamp_unix,
            status: Status::Passed,
            reason: None,
            config: config.echo(),
            checks: Vec::new(),
            fits: BTreeMap::new(),
            values: BTreeMap::new(),
        }
    }

    /// Records a check and returns whether it passed. NaN never passes.
    pub fn check(&mut self, name: &str, criterion: Option<u8>, value: f64, bound: Bound) -> bool {
        let passed = bound.holds(value);
        log::info!(
            "{} {name} = {value:.4e} ({bound:?})",
            if passed { "PASS" } else { "FAIL" }
        );
        self.checks.push(Check {
            name: name.to_string(),
            criterion,
            value,
            bound,
            passed,
        });
        passed
    }

    pub fn fit(&mut self, name: &str, fit: DecayFit) {
        self.fits.insert(name.to_string(), fit);
    }

    pub fn value(&mut self, name: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.values.insert(name.to_string(), v);
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn finalize(&mut self) {
        if self.status != Status::Error {
            self.status = if self.all_passed() { Status::Passed } else { Status::Failed };
            let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            self.reason = (!failed.is_empty()).then(|| format!("failed checks: {}", failed.join(", ")));
        }
    }
}

/// Destination for run artifacts; `None` keeps everything in memory.
#[derive(Clone, Debug, Default)]
pub struct OutputDir {
    dir: Option<PathBuf>,
}

impl OutputDir {
    pub fn new(dir: Option<&Path>) -> Result<Self> {
        if let Some(d) = dir {
            fs::create_dir_all(d)?;
        }
        Ok(Self { dir: dir.map(Path::to_path_buf) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn write_csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let mut w = csv::Writer::from_path(dir.join(name))?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        if let Some(dir) = &self.dir {
            fs::write(dir.join(name), text)?;
        }
        Ok(())
    }

    pub fn write_report(&self, report: &Report) -> Result<()> {
        if let Some(dir) = &self.dir {
            fs::write(dir.join("results.json"), serde_json::to_string_pretty(report)?)?;
        }
        Ok(())
    }
}
