//! Suite reports: per-check records, CSV and JSON emission.
//!
//! Reports are deterministic functions of `(config, seed)`: wall time
//! is kept out of the serialized artifacts, floats are written in a
//! fixed format, and files are written to a temporary name and renamed,
//! so no partial files survive a failure.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub suite: String,
    pub check_id: String,
    pub n: usize,
    pub seed: u64,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub records: Vec<CheckRecord>,
    /// Fitted constants exposed by the suite (deterministic).
    pub fitted: std::collections::BTreeMap<String, f64>,
    /// Wall time is informational only and never serialized.
    #[serde(skip)]
    pub wall_ms: u128,
}

impl SuiteReport {
    pub fn new(suite: &str) -> SuiteReport {
        SuiteReport {
            suite: suite.to_string(),
            records: Vec::new(),
            fitted: std::collections::BTreeMap::new(),
            wall_ms: 0,
        }
    }

    pub fn push(&mut self, check_id: &str, n: usize, seed: u64, measured: f64, bound: f64, pass: bool) {
        self.records.push(CheckRecord {
            suite: self.suite.clone(),
            check_id: check_id.to_string(),
            n,
            seed,
            measured,
            bound,
            pass,
        });
    }

    /// Push a `measured <= bound` check.
    pub fn check_le(&mut self, check_id: &str, n: usize, seed: u64, measured: f64, bound: f64) {
        self.push(check_id, n, seed, measured, bound, measured <= bound);
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn fit(&mut self, name: &str, value: f64) {
        self.fitted.insert(name.to_string(), value);
    }

    /// Fixed-column CSV: suite, check_id, n, seed, measured, bound, pass.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,check_id,n,seed,measured,bound,pass\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.suite,
                r.check_id,
                r.n,
                r.seed,
                fmt_float(r.measured),
                fmt_float(r.bound),
                r.pass
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "schema": "horolab.report.v1",
            "suite": self.suite,
            "records": self.records,
            "fitted": self.fitted,
        }))
        .expect("report serialization cannot fail")
    }
}

/// Deterministic float formatting for the CSV artifacts.
pub fn fmt_float(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{:.12e}", x)
    }
}

/// Write bytes to a temporary sibling and atomically rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .ok_or_else(|| Error::Io(format!("no parent for {}", path.display())))?;
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "artifact".into())
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
