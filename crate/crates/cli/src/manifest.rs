//! Run manifests and config loading.

use crate::{CliError, CliResult};
use alphats_core::policy::AgentDiagnostics;
use alphats_core::ExperimentConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// Written as `manifest.json` next to the CSV files. The `config` field is the fully
/// resolved configuration (command-line overrides applied), so passing the manifest
/// back as `--config` reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub build: String,
    pub config: ExperimentConfig,
    pub threads: Option<usize>,
    pub replication_seeds: Vec<u64>,
    pub wall_clock_seconds: f64,
    pub files: Vec<String>,
    /// Plot-side scaling factor for variance bands, copied from the config.
    pub variance_scale: Option<f64>,
    pub summary: Vec<SummaryEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub policy: String,
    pub final_time_avg_regret_mean: f64,
    pub final_time_avg_regret_variance: f64,
    pub diagnostics: AgentDiagnostics,
}

pub fn build_id() -> String {
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    format!("{} {} ({profile})", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

/// Reads a TOML config, or the `config` field of a JSON run manifest.
pub fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let cfg = if text.trim_start().starts_with('{') {
        let manifest: RunManifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if manifest.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "{}: unsupported manifest schema_version {}",
                path.display(),
                manifest.schema_version
            )));
        }
        manifest.config.validate().map_err(|e| CliError::Config(e.to_string()))?;
        manifest.config
    } else {
        ExperimentConfig::from_toml_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
    };
    Ok(cfg)
}
