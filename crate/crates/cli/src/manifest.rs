//! Run manifests: configuration echo, timing and per-check outcomes.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Hard checks decide the exit status; soft ones are reported only.
    pub hard: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub version: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Output directory plus the checks collected while an experiment runs.
#[derive(Debug)]
pub struct Run {
    pub out: PathBuf,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub outputs: Vec<String>,
}

impl Run {
    pub fn new(out: &Path, seed: u64) -> CliResult<Self> {
        fs::create_dir_all(out)?;
        Ok(Self {
            out: out.to_path_buf(),
            seed,
            checks: Vec::new(),
            outputs: Vec::new(),
        })
    }

    fn push(&mut self, name: impl Into<String>, measured: f64, lower: Option<f64>, upper: Option<f64>, hard: bool) -> bool {
        let passed = !measured.is_nan() && lower.is_none_or(|l| measured >= l) && upper.is_none_or(|u| measured <= u);
        self.checks.push(Check {
            name: name.into(),
            measured,
            lower,
            upper,
            hard,
            passed,
        });
        passed
    }

    pub fn at_most(&mut self, name: impl Into<String>, measured: f64, tol: f64) -> bool {
        self.push(name, measured, None, Some(tol), true)
    }

    pub fn at_least(&mut self, name: impl Into<String>, measured: f64, bound: f64) -> bool {
        self.push(name, measured, Some(bound), None, true)
    }

    pub fn within(&mut self, name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> bool {
        self.push(name, measured, Some(lo), Some(hi), true)
    }

    /// Informative value with an expected range that does not gate the run.
    pub fn report(&mut self, name: impl Into<String>, measured: f64, lo: Option<f64>, hi: Option<f64>) -> bool {
        self.push(name, measured, lo, hi, false)
    }

    pub fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.out.join(name)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let file = fs::File::create(self.path(name))?;
        serde_json::to_writer_pretty(BufWriter::new(file), value)?;
        Ok(())
    }

    pub fn write_csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> CliResult<()> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().filter(|c| c.hard).all(|c| c.passed)
    }

    pub fn finish(self, experiment: &str, config: BTreeMap<String, String>, wall: f64) -> CliResult<RunManifest> {
        let manifest = RunManifest {
            experiment: experiment.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.seed,
            config,
            wall_time_seconds: wall,
            passed: self.passed(),
            outputs: self.outputs,
            checks: self.checks,
        };
        let file = fs::File::create(self.out.join("manifest.json"))?;
        serde_json::to_writer_pretty(BufWriter::new(file), &manifest)?;
        Ok(manifest)
    }
}
