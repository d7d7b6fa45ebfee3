use std::path::{Path, PathBuf};

use asc_core::frontend::{AecConfig, DEFAULT_UPSAMPLE};
use asc_core::kws::{DEFAULT_SMOOTH_WINDOW, DEFAULT_THRESHOLD};
use asc_core::room::{SimConfig, SPEED_OF_SOUND};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Directory searched for `asc.toml` when `--config` is not given.
pub const CONFIG_DIR_ENV: &str = "ASC_CONFIG_DIR";
pub const CONFIG_FILE_NAME: &str = "asc.toml";

/// Everything a run can be configured with; one section per subcommand.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AscConfig {
    pub simulate: SimulateSection,
    pub frontend: FrontendSection,
    pub kws: KwsSection,
    pub score: ScoreSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub count: u64,
    pub seed: u64,
    pub scene: SimConfig,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            count: 10,
            seed: 0,
            scene: SimConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontendSection {
    pub enable_aec: bool,
    pub aec: AecConfig,
    pub upsample: usize,
    pub speed_of_sound: f64,
    /// Also emit energy-gate posterior files for `kws-decide`.
    pub posteriors: bool,
    pub energy_floor_db: f64,
}

impl Default for FrontendSection {
    fn default() -> Self {
        Self {
            enable_aec: true,
            aec: AecConfig::default(),
            upsample: DEFAULT_UPSAMPLE,
            speed_of_sound: SPEED_OF_SOUND,
            posteriors: false,
            energy_floor_db: -65.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KwsSection {
    pub window: usize,
    pub threshold: f64,
}

impl Default for KwsSection {
    fn default() -> Self {
        Self {
            window: DEFAULT_SMOOTH_WINDOW,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreSection {
    /// Reference MAE in degrees for the SSL score.
    pub mae_baseline: f64,
}

/// Expected circular error of a uniformly random azimuth guess.
pub const CHANCE_MAE: f64 = 90.0;

impl Default for ScoreSection {
    fn default() -> Self {
        Self {
            mae_baseline: CHANCE_MAE,
        }
    }
}

/// Explicit path first, then `$ASC_CONFIG_DIR/asc.toml`, then defaults.
pub fn config_path(explicit: Option<&Path>) -> Option<PathBuf> {
    if let Some(p) = explicit {
        return Some(p.to_path_buf());
    }
    let dir = std::env::var_os(CONFIG_DIR_ENV)?;
    let p = Path::new(&dir).join(CONFIG_FILE_NAME);
    p.is_file().then_some(p)
}

pub fn load(explicit: Option<&Path>) -> Result<AscConfig, CliError> {
    let Some(path) = config_path(explicit) else {
        return Ok(AscConfig::default());
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message)))
}

pub fn parse(text: &str) -> Result<AscConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
}
