//! Tool settings loaded from one JSON file. Missing fields take defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::SynthesisConfig;
use crate::evalkit::DEFAULT_WINDOW_MS;
use crate::relations::RelationConfig;

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct CliConfig {
    pub relations: RelationConfig,
    pub synthesis: SynthesisConfig,
    pub sink_path: PathBuf,
    pub bind_address: String,
    /// Snapshot directory served over HTTP.
    pub corpus_dir: Option<PathBuf>,
    pub match_window_ms: i64,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            relations: RelationConfig::default(),
            synthesis: SynthesisConfig::default(),
            sink_path: PathBuf::from("records.ndjson"),
            bind_address: DEFAULT_BIND.into(),
            corpus_dir: None,
            match_window_ms: DEFAULT_WINDOW_MS,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl CliConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: CliConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.synthesis.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if cfg.match_window_ms < 0 {
            return Err(ConfigError::Invalid("matchWindowMs must be non-negative".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text, path)
    }

    /// The file at `path` if given, else defaults.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self, ConfigError> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}
