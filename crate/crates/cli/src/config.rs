//! Optional TOML config file. Every key is a fallback for the flag of the
//! same name; flags always win. Relative paths resolve against the
//! directory holding the config file.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub corpus: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub tvdb: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub assignments: Option<PathBuf>,
    pub index_dir: Option<PathBuf>,
    pub profiles: Option<PathBuf>,
    pub click_log: Option<PathBuf>,
    pub gender_lexicon: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub judgments: Option<PathBuf>,
    pub static_dir: Option<PathBuf>,
    pub hot_threshold: Option<u64>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub lambda: Option<f64>,
    pub epochs: Option<usize>,
    pub port: Option<u16>,
}

/// A missing or invalid argument; reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

impl Config {
    pub fn parse(text: &str, base: &Path) -> anyhow::Result<Self> {
        let mut cfg: Config = toml::from_str(text).map_err(|e| UsageError(format!("config: {e}")))?;
        for p in [
            &mut cfg.corpus,
            &mut cfg.stopwords,
            &mut cfg.tvdb,
            &mut cfg.model,
            &mut cfg.assignments,
            &mut cfg.index_dir,
            &mut cfg.profiles,
            &mut cfg.click_log,
            &mut cfg.gender_lexicon,
            &mut cfg.queries,
            &mut cfg.judgments,
            &mut cfg.static_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

/// The flag value, else the config value, else a usage error naming both.
pub fn require<T: Clone>(flag: Option<T>, config: &Option<T>, flag_name: &str, key: &str) -> anyhow::Result<T> {
    flag.or_else(|| config.clone())
        .ok_or_else(|| UsageError(format!("missing --{flag_name} (or `{key}` in the config file)")).into())
}

pub fn positive<T: PartialOrd + Default + fmt::Display>(value: T, name: &str) -> anyhow::Result<T> {
    if value > T::default() {
        Ok(value)
    } else {
        Err(UsageError(format!("{name} must be positive, got {value}")).into())
    }
}
