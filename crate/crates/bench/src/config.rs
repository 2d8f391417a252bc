//! Optional TOML file overriding benchmark defaults.
//!
//! ```toml
//! problem = "hires"
//! algs = ["implicit_euler", "implicit_hairer_wanner"]
//! threads = 4
//! repeats = 5
//! out = "results"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{BenchError, Result};

pub const THREADS_ENV: &str = "PAREX_THREADS";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub problem: Option<String>,
    pub algs: Option<Vec<String>>,
    pub threads: Option<usize>,
    pub repeats: Option<usize>,
    pub warmup: Option<usize>,
    pub out: Option<PathBuf>,
}

impl BenchConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }
}

/// Worker count: explicit flag, then config file, then `PAREX_THREADS`, then
/// the machine's available parallelism.
pub fn resolve_threads(flag: Option<usize>, config: &BenchConfig, env: Option<&str>) -> Result<usize> {
    let n = match (flag, config.threads, env) {
        (Some(n), _, _) | (None, Some(n), _) => n,
        (None, None, Some(v)) => v
            .trim()
            .parse()
            .map_err(|_| BenchError::Config(format!("{THREADS_ENV}={v} is not a positive integer")))?,
        (None, None, None) => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    if n == 0 {
        return Err(BenchError::Config("thread count must be positive".into()));
    }
    Ok(n)
}
