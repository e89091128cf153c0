//! Run configuration: a single human-editable key-value file.
//!
//! Lines are `key = value` with `#` comments; vectors are
//! whitespace-separated numbers. Only the seed and the output directory
//! can be overridden from the environment (`HOROLAB_SEED`,
//! `HOROLAB_OUT`).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::calibrate::CalibrationConstants;
use crate::error::{Error, Result};
use crate::liecore::CartanVector;
use crate::policy::NumericPolicy;
use crate::symspace::BusemannConfig;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: usize,
    pub seed: u64,
    /// Busemann center direction; `None` selects the chamber
    /// barycenter.
    pub tau: Option<Vec<f64>>,
    pub out_dir: PathBuf,
    /// Per-suite sample count overrides.
    pub samples: BTreeMap<String, usize>,
    /// Tolerance overrides (narrow use; construction tolerances are
    /// fixed by the numeric policy).
    pub tolerances: BTreeMap<String, f64>,
    pub calib: CalibrationConstants,
    /// Calibration keys set explicitly by the configuration file (they
    /// take precedence over a loaded lockfile).
    pub calib_overrides: Vec<(String, f64)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 3,
            seed: 42,
            tau: None,
            out_dir: PathBuf::from("out"),
            samples: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            calib: CalibrationConstants::defaults(3),
            calib_overrides: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn for_n(n: usize) -> RunConfig {
        RunConfig {
            n,
            calib: CalibrationConstants::defaults(n),
            ..Default::default()
        }
    }

    pub fn parse_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {}", path.display(), e)))?;
        RunConfig::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut calib_overrides: Vec<(String, f64)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| {
                Error::InvalidConfig(format!("line {}: bad {} `{}`", lineno + 1, what, value))
            };
            match key {
                "n" => cfg.n = value.parse().map_err(|_| bad("integer"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad("integer"))?,
                "out_dir" => cfg.out_dir = PathBuf::from(value),
                "tau" => {
                    let v: std::result::Result<Vec<f64>, _> =
                        value.split_whitespace().map(str::parse).collect();
                    cfg.tau = Some(v.map_err(|_| bad("vector"))?);
                }
                _ if key.starts_with("samples.") => {
                    let name = key.trim_start_matches("samples.").to_string();
                    cfg.samples
                        .insert(name, value.parse().map_err(|_| bad("integer"))?);
                }
                _ if key.starts_with("tol.") => {
                    let name = key.trim_start_matches("tol.").to_string();
                    cfg.tolerances
                        .insert(name, value.parse().map_err(|_| bad("number"))?);
                }
                _ if key.starts_with("calib.") => {
                    let name = key.trim_start_matches("calib.").to_string();
                    let v: f64 = value.parse().map_err(|_| bad("number"))?;
                    calib_overrides.push((name, v));
                }
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "line {}: unknown key `{}`",
                        lineno + 1,
                        key
                    )))
                }
            }
        }
        cfg.calib = CalibrationConstants::defaults(cfg.n);
        for (name, v) in &calib_overrides {
            cfg.calib.set(name, *v)?;
        }
        cfg.calib_overrides = calib_overrides;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load a calibration lockfile if present: lockfile constants
    /// override the defaults, explicit configuration keys override the
    /// lockfile.
    pub fn apply_lockfile(&mut self, path: &Path) -> Result<bool> {
        if !path.exists() {
            return Ok(false);
        }
        let text = std::fs::read_to_string(path)?;
        self.calib = crate::calibrate::CalibrationConstants::from_lockfile(&text)?;
        let overrides = self.calib_overrides.clone();
        for (name, v) in &overrides {
            self.calib.set(name, *v)?;
        }
        Ok(true)
    }

    /// Apply `HOROLAB_SEED` / `HOROLAB_OUT` (the only supported
    /// environment overrides).
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(s) = std::env::var("HOROLAB_SEED") {
            self.seed = s
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("HOROLAB_SEED `{}`", s)))?;
        }
        if let Ok(s) = std::env::var("HOROLAB_OUT") {
            self.out_dir = PathBuf::from(s);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig("n must be at least 2".into()));
        }
        if let Some(t) = &self.tau {
            if t.len() != self.n {
                return Err(Error::InvalidConfig(format!(
                    "tau has {} entries for n = {}",
                    t.len(),
                    self.n
                )));
            }
            let c = CartanVector::project(nalgebra::DVector::from_vec(t.clone())).normalized();
            if !c.is_regular_descending(NumericPolicy::DEFAULT.regular_gap_tol) {
                return Err(Error::InvalidConfig(
                    "tau must have strictly decreasing entries".into(),
                ));
            }
        }
        for (k, v) in &self.samples {
            if *v == 0 {
                return Err(Error::InvalidConfig(format!("samples.{} must be >= 1", k)));
            }
        }
        Ok(())
    }

    pub fn busemann_config(&self) -> Result<BusemannConfig> {
        match &self.tau {
            None => Ok(BusemannConfig::barycentric(self.n)),
            Some(t) => BusemannConfig::new(
                CartanVector::project(nalgebra::DVector::from_vec(t.clone())).normalized(),
            ),
        }
    }

    pub fn sample_count(&self, suite: &str, default: usize) -> usize {
        self.samples.get(suite).copied().unwrap_or(default)
    }

    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_value_file() {
        let cfg = RunConfig::parse_str(
            "# comment\nn = 4\nseed = 7\ntau = 3 1 -1 -3\nsamples.iwasawa = 200\ncalib.rho_star = 5.5\nout_dir = /tmp/x\n",
        )
        .unwrap();
        assert_eq!(cfg.n, 4);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.sample_count("iwasawa", 10), 200);
        assert_eq!(cfg.calib.rho_star, 5.5);
    }

    #[test]
    fn rejects_irregular_tau() {
        assert!(RunConfig::parse_str("n = 3\ntau = 1 1 -2\n").is_err());
    }

    #[test]
    fn rejects_unknown_keys_and_zero_counts() {
        assert!(RunConfig::parse_str("bogus = 1\n").is_err());
        assert!(RunConfig::parse_str("samples.compare = 0\n").is_err());
    }
}
