//! Numeric settings: defaults, then the file named by `XFEYN_CONFIG`, then
//! `--config`, then flags. Files may set any subset of keys.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use xfeyn_core::amplitude::AmplitudeOrders;
use xfeyn_core::propagators::IntegralConfig;
use xfeyn_core::specfun::BesselEvalConfig;

use crate::CliError;

pub const CONFIG_ENV: &str = "XFEYN_CONFIG";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub bessel: BesselEvalConfig,
    pub integral: IntegralConfig,
    pub orders: AmplitudeOrders,
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl Config {
    /// Layers `files` (in order) over the defaults.
    pub fn load(files: &[&Path]) -> Result<Config, CliError> {
        let mut v = serde_json::to_value(Config::default()).expect("defaults serialize");
        for path in files {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let patch: Value =
                serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            merge(&mut v, patch);
        }
        let cfg: Config = serde_json::from_value(v).map_err(|e| CliError::Input(format!("config: {e}")))?;
        cfg.bessel.validate().map_err(|e| CliError::Input(format!("config: {e}")))?;
        Ok(cfg)
    }
}
