//! Declarative experiment campaigns, loaded from JSON.

use std::collections::HashSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::SimMode;
use crate::protocol::{ParamError, ProtocolKind, ProtocolParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("entry {index} ({protocol}): {source}")]
    Entry {
        index: usize,
        protocol: String,
        #[source]
        source: ParamError,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(ConfigError::Invalid(format!(
                "unknown format {other:?} (expected csv or json)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryConfig {
    pub protocol: String,
    pub k_values: Vec<u64>,
    #[serde(default = "default_runs")]
    pub runs: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

fn default_runs() -> u64 {
    10
}

fn default_seed() -> u64 {
    42
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub entries: Vec<EntryConfig>,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub mode: SimMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            entries: Vec::new(),
            master_seed: default_seed(),
            mode: SimMode::default(),
            output: None,
        }
    }
}

/// An entry whose parameters passed validation.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedEntry {
    pub params: ProtocolParams,
    pub k_values: Vec<u64>,
    pub runs: u64,
}

impl EntryConfig {
    pub fn validate(&self) -> Result<ValidatedEntry, ParamError> {
        let kind: ProtocolKind = self.protocol.parse()?;
        let params = ProtocolParams::build(kind, self.delta, self.r)?;
        if self.k_values.is_empty() {
            return Err(ParamError::Invalid("k_values is empty".into()));
        }
        if self.k_values.contains(&0) {
            return Err(ParamError::Invalid("k values must be positive".into()));
        }
        if self.runs == 0 {
            return Err(ParamError::Invalid("runs must be positive".into()));
        }
        Ok(ValidatedEntry {
            params,
            k_values: self.k_values.clone(),
            runs: self.runs,
        })
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Validates every entry up front. A `(protocol, k)` pair may appear only
    /// once, since results are aggregated by that pair.
    pub fn validate(&self) -> Result<Vec<ValidatedEntry>, ConfigError> {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(self.entries.len());
        for (index, entry) in self.entries.iter().enumerate() {
            let v = entry.validate().map_err(|source| ConfigError::Entry {
                index,
                protocol: entry.protocol.clone(),
                source,
            })?;
            for &k in &v.k_values {
                if !seen.insert((v.params.kind(), k)) {
                    return Err(ConfigError::Invalid(format!(
                        "entry {index}: {} with k={k} appears more than once",
                        v.params.kind()
                    )));
                }
            }
            out.push(v);
        }
        Ok(out)
    }
}
