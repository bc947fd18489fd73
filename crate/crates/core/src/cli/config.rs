use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::DEFAULT_N_MAX;
use crate::height::{DEFAULT_EPS, DEFAULT_TOL};
use crate::periodic::{CommonOptions, DEFAULT_HEIGHT_BOUND, DEFAULT_PRIMES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Values read from `--config`; every field is optional and sits under the
/// explicit flags.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub tol: Option<f64>,
    pub n_max: Option<u32>,
    pub primes: Option<Vec<u64>>,
    pub seed: Option<u64>,
    pub eps: Option<f64>,
    pub max_period: Option<usize>,
    pub starts: Option<usize>,
    pub height_bound: Option<u64>,
    pub iterate_bound: Option<u32>,
    pub cache: Option<PathBuf>,
    pub threads: Option<usize>,
    pub format: Option<Format>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            serde_json::from_str(&text).map_err(|e| Error::invalid("config", e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| Error::invalid("config", e.to_string()))
        }
    }
}

/// Fully resolved settings, embedded in every JSON output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub tol: f64,
    pub n_max: u32,
    pub primes: Vec<u64>,
    pub seed: u64,
    pub eps: f64,
    pub max_period: usize,
    pub starts: usize,
    pub height_bound: u64,
    pub iterate_bound: u32,
    pub cache: Option<PathBuf>,
    /// 0 means one worker per core.
    pub threads: usize,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tol: DEFAULT_TOL,
            n_max: DEFAULT_N_MAX,
            primes: DEFAULT_PRIMES.to_vec(),
            seed: 0,
            eps: DEFAULT_EPS,
            max_period: 2,
            starts: 64,
            height_bound: DEFAULT_HEIGHT_BOUND,
            iterate_bound: 4,
            cache: None,
            threads: 0,
            format: Format::Json,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("tol", self.tol), ("eps", self.eps)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(field, "must be positive and finite"));
            }
        }
        if self.n_max == 0 {
            return Err(Error::invalid("n_max", "must be positive"));
        }
        if self.max_period == 0 {
            return Err(Error::invalid("max_period", "must be positive"));
        }
        if self.primes.is_empty() {
            return Err(Error::invalid("primes", "need at least one prime"));
        }
        if let Some(p) = self.primes.iter().find(|&&p| !crate::rational::is_prime(p)) {
            return Err(Error::invalid("primes", format!("{p} is not prime")));
        }
        Ok(())
    }

    pub fn common_options(&self, numeric: bool) -> CommonOptions {
        CommonOptions {
            max_period: self.max_period,
            tol: self.tol,
            primes: self.primes.clone(),
            height_bound: self.height_bound,
            numeric,
            n_starts: self.starts,
            seed: self.seed,
            iterate_bound: self.iterate_bound,
            eps: self.eps,
        }
    }
}
