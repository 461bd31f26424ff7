//! Engine configuration, optionally read from a TOML file:
//!
//! ```toml
//! example_limit = 10
//! debounce_ms = 200
//!
//! [ranking]
//! density_bonus = 5
//! api_weight = 2
//! keyword_weight = 1
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankingConfig {
    /// Numerator of the short-example bonus in `calls + bonus / lines`.
    pub density_bonus: u32,
    /// Task-search points for a query word that names a called API.
    pub api_weight: u32,
    /// Task-search points for a query word found in the title or comments.
    pub keyword_weight: u32,
}

impl Default for RankingConfig {
    fn default() -> Self {
        RankingConfig {
            density_bonus: 5,
            api_weight: 2,
            keyword_weight: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Examples returned per resolve when the request names no limit.
    pub example_limit: usize,
    /// Suggested client debounce after the last keystroke or cursor move.
    pub debounce_ms: u64,
    pub ranking: RankingConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            example_limit: 10,
            debounce_ms: 200,
            ranking: RankingConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: example_limit must be at least 1")]
    ZeroLimit,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Config = toml::from_str(text)?;
        if config.example_limit == 0 {
            return Err(ConfigError::ZeroLimit);
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// `Config::load` when a path is given, the defaults otherwise.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self, ConfigError> {
        path.map_or_else(|| Ok(Config::default()), Self::load)
    }
}
