use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use tempered_core::sobolev::HermiteCoeffs;

use crate::config::RunConfig;

pub const TOOL: &str = "tempered";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Contents of `report.json`. Wall-clock data lives in `timings.json` so the
/// report itself is reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub results: serde_json::Value,
    pub verdicts: Vec<Verdict>,
    pub failures: Vec<String>,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig, results: serde_json::Value, verdicts: Vec<Verdict>) -> Self {
        let failures = verdicts.iter().filter(|v| !v.passed).map(|v| v.name.clone()).collect();
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            config: config.clone(),
            results,
            verdicts,
            failures,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// One output directory: `config.json`, `coefficients/*.json`,
/// `tables/*.csv`, `report.json`, `timings.json`.
#[derive(Debug)]
pub struct Bundle {
    dir: PathBuf,
    timings: BTreeMap<String, f64>,
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

impl Bundle {
    pub fn create(dir: &Path, config: &RunConfig) -> Result<Self> {
        fs::create_dir_all(dir.join("coefficients")).with_context(|| format!("creating {}", dir.display()))?;
        fs::create_dir_all(dir.join("tables"))?;
        write_json(&dir.join("config.json"), config)?;
        Ok(Self { dir: dir.to_path_buf(), timings: BTreeMap::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn coeffs(&self, name: &str, phi: &HermiteCoeffs) -> Result<()> {
        write_json(&self.dir.join("coefficients").join(format!("{name}.json")), phi)
    }

    pub fn json<T: Serialize + ?Sized>(&self, relative: &str, value: &T) -> Result<()> {
        write_json(&self.dir.join(relative), value)
    }

    pub fn table(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_path(self.dir.join("tables").join(format!("{name}.csv")))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.timings.entry(stage.to_owned()).or_default() += start.elapsed().as_secs_f64();
        out
    }

    pub fn finish(self, report: &Report) -> Result<PathBuf> {
        write_json(&self.dir.join("report.json"), report)?;
        write_json(&self.dir.join("timings.json"), &self.timings)?;
        Ok(self.dir)
    }
}
