//! Optional TOML configuration. Every field is optional and command-line
//! flags override it.
//!
//! ```toml
//! jobs = 4
//!
//! [synth]
//! cases = 20
//! dims = [32, 32, 8]
//!
//! [loss]
//! k = [100, 20, 10, 5]
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::args::{DmMode, Norm};
use crate::Failure;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub jobs: Option<usize>,
    #[serde(default)]
    pub synth: SynthConfig,
    #[serde(default)]
    pub uam: UamConfig,
    #[serde(default)]
    pub stage1: Stage1Config,
    #[serde(default)]
    pub evaluate: EvaluateConfig,
    #[serde(default)]
    pub loss: LossConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: Option<u64>,
    pub cases: Option<usize>,
    pub outlier_cases: Option<usize>,
    pub dims: Option<[usize; 3]>,
    pub spacing: Option<[f64; 3]>,
    pub corruption: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UamConfig {
    pub prob_name: Option<String>,
    pub sigma_factor: Option<f64>,
    pub two_sided: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage1Config {
    pub dm_mode: Option<DmMode>,
    pub prob_name: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateConfig {
    pub hd95: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    pub k: Option<Vec<f64>>,
    pub norm: Option<Norm>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::bad_input(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::bad_input(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
