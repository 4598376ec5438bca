//! The configuration file shared by every subcommand.

use std::path::Path;

use dstwr::experiments::{default_cfo_delays, SweepConfig};
use dstwr::{ScenarioConfig, TimeSpan};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Delays of the CFO comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfoSection {
    #[serde(default = "default_cfo_delays")]
    pub delays: Vec<TimeSpan>,
}

impl Default for CfoSection {
    fn default() -> Self {
        CfoSection { delays: default_cfo_delays() }
    }
}

/// `[scenario]` is the exchange every command starts from, `[sweep]` the
/// Monte-Carlo settings (everything of a sweep except its scenario) and
/// `[cfo]` the CFO comparison grid. All sections are optional.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub cfo: CfoSection,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new("io", format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::new("config", format!("{}: {}", path.display(), e.message)))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| CliError::new("config", e.to_string()))?;
        if table.get("sweep").and_then(|s| s.get("base_scenario")).is_some() {
            return Err(CliError::new("config", "sweep.base_scenario is not accepted; put the scenario under [scenario]"));
        }
        let mut cfg: FileConfig = toml::from_str(text).map_err(|e| CliError::new("config", e.to_string()))?;
        cfg.sweep.base_scenario = cfg.scenario;
        Ok(cfg)
    }
}

/// SHA-256 of the canonical TOML rendering of whatever configuration a
/// command actually ran with (after command-line overrides).
pub fn config_hash<T: Serialize>(effective: &T) -> Result<String, CliError> {
    let text = toml::to_string(effective).map_err(|e| CliError::new("config", e.to_string()))?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}
