use std::path::{Path, PathBuf};

use cmlecon::ValueRange;
use serde::Deserialize;

use crate::args::ExchangeModel;
use crate::UsageError;

pub const OUT_DIR_ENV: &str = "CMLECON_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "out";

/// Values read from `--config`. Keys use the long flag names.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub a: Option<f64>,
    pub r: Option<f64>,
    pub n: Option<usize>,
    pub transient: Option<u64>,
    pub measure_iters: Option<u64>,
    pub realizations: Option<u64>,
    pub seed: Option<u64>,
    pub snapshot_only: Option<bool>,
    pub init_lo: Option<f64>,
    pub init_hi: Option<f64>,
    pub bins: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub a_range: Option<String>,
    pub r_range: Option<String>,
    pub kept: Option<usize>,
    pub x_init: Option<f64>,
    pub model: Option<ExchangeModel>,
    pub omega: Option<f64>,
    pub transactions: Option<u64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())).into())
    }

    pub fn out_dir(&self, flag: Option<PathBuf>) -> PathBuf {
        flag.or_else(|| self.out_dir.clone())
            .or_else(|| {
                std::env::var_os(OUT_DIR_ENV)
                    .filter(|v| !v.is_empty())
                    .map(PathBuf::from)
            })
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}

/// Flag value, else file value, else `default`.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

pub fn require<T>(flag: Option<T>, file: Option<T>, name: &str) -> anyhow::Result<T> {
    flag.or(file)
        .ok_or_else(|| UsageError(format!("--{name} is required")).into())
}

/// Range from the flag, else parsed from the config file.
pub fn range(
    flag: Option<ValueRange>,
    file: Option<&str>,
    name: &str,
) -> anyhow::Result<ValueRange> {
    if let Some(r) = flag {
        return Ok(r);
    }
    match file {
        Some(s) => s
            .parse()
            .map_err(|e| UsageError(format!("invalid {name} in config: {e}")).into()),
        None => Err(UsageError(format!("--{name} is required")).into()),
    }
}
