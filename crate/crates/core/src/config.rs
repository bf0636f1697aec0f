//! Run configuration: defaults, validation, and the `key = value` file
//! format shared by the CLI and the resolved-config echo.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::KrylovOrder;

/// Parameters steering a multi-seed expansion run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Subspace iteration rounds.
    pub k: usize,
    /// Requested subspace dimension parameter.
    pub l: usize,
    /// Minimum cluster size the sweep may return.
    pub n_min: usize,
    /// Sample-size cap per seed.
    pub cap_n: usize,
    /// Degree threshold: higher-degree nodes are not sampled, and seeds
    /// above it are skipped.
    pub d_max: usize,
    /// Minimum edge weight retained during sampling.
    pub m: f64,
    /// Temporal half-window in seconds.
    pub delta_t: u64,
    /// Density threshold for validation.
    pub rho_min: f64,
    /// Worker pool size.
    pub worker_count: usize,
    /// Targets engaged by more actors than this are skipped during graph
    /// construction.
    pub hot_target_cap: usize,
    /// Size rule for the initial Krylov basis.
    pub krylov_order: KrylovOrder,
    /// Drop edge weights (every retained edge counts 1) before the
    /// spectral stage, for ablation runs.
    pub binary_adjacency: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            k: 3,
            l: 3,
            n_min: 15,
            cap_n: 3000,
            d_max: 500,
            m: 1.0,
            delta_t: 1800,
            rho_min: 0.5,
            worker_count: 1,
            hot_target_cap: 10_000,
            krylov_order: KrylovOrder::default(),
            binary_adjacency: false,
        }
    }
}

impl RunConfig {
    /// Check the invariants every run relies on.
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: usize) -> Result<()> {
            if v == 0 {
                Err(Error::Config(format!("{name} must be positive")))
            } else {
                Ok(())
            }
        }
        positive("k", self.k)?;
        positive("l", self.l)?;
        positive("n_min", self.n_min)?;
        positive("cap_n", self.cap_n)?;
        positive("d_max", self.d_max)?;
        positive("worker_count", self.worker_count)?;
        positive("hot_target_cap", self.hot_target_cap)?;
        if self.delta_t == 0 {
            return Err(Error::Config("delta_t must be positive".to_string()));
        }
        if !(self.m > 0.0) {
            return Err(Error::Config("m must be positive".to_string()));
        }
        if !(self.rho_min > 0.0) {
            return Err(Error::Config("rho_min must be positive".to_string()));
        }
        Ok(())
    }

    /// Apply one `key = value` assignment.  `workers` is accepted as an
    /// alias for `worker_count`; unknown keys are rejected.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        fn us(key: &str, value: &str) -> Result<usize> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("{key}: expected an integer, got {value:?}")))
        }
        fn fl(key: &str, value: &str) -> Result<f64> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("{key}: expected a number, got {value:?}")))
        }
        match key {
            "k" => self.k = us(key, value)?,
            "l" => self.l = us(key, value)?,
            "n_min" => self.n_min = us(key, value)?,
            "cap_n" => self.cap_n = us(key, value)?,
            "d_max" => self.d_max = us(key, value)?,
            "m" => self.m = fl(key, value)?,
            "delta_t" => {
                self.delta_t = value.parse().map_err(|_| {
                    Error::Config(format!("delta_t: expected an integer, got {value:?}"))
                })?
            }
            "rho_min" => self.rho_min = fl(key, value)?,
            "worker_count" | "workers" => self.worker_count = us(key, value)?,
            "hot_target_cap" => self.hot_target_cap = us(key, value)?,
            "krylov_order" => self.krylov_order = value.parse()?,
            "binary_adjacency" => {
                self.binary_adjacency = match value {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(Error::Config(format!(
                            "binary_adjacency: expected true or false, got {other:?}"
                        )))
                    }
                }
            }
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Merge `key = value` lines (comments `#` and blank lines allowed)
    /// into this config.  Errors carry the offending line number.
    pub fn merge_kv_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`, got {raw:?}", idx + 1))
            })?;
            self.apply_kv(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", idx + 1)))?;
        }
        Ok(())
    }

    /// Defaults overlaid with assignments from a config file.
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = RunConfig::default();
        cfg.merge_kv_text(&text)?;
        Ok(cfg)
    }

    /// Canonical `key = value` rendering; parses back to an equal config.
    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "k = {}", self.k);
        let _ = writeln!(out, "l = {}", self.l);
        let _ = writeln!(out, "n_min = {}", self.n_min);
        let _ = writeln!(out, "cap_n = {}", self.cap_n);
        let _ = writeln!(out, "d_max = {}", self.d_max);
        let _ = writeln!(out, "m = {}", self.m);
        let _ = writeln!(out, "delta_t = {}", self.delta_t);
        let _ = writeln!(out, "rho_min = {}", self.rho_min);
        let _ = writeln!(out, "worker_count = {}", self.worker_count);
        let _ = writeln!(out, "hot_target_cap = {}", self.hot_target_cap);
        let _ = writeln!(out, "krylov_order = {}", self.krylov_order);
        let _ = writeln!(out, "binary_adjacency = {}", self.binary_adjacency);
        out
    }
}
