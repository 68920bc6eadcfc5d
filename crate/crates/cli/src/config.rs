//! JSON run configuration. Command-line flags take precedence over the file.
//!
//! ```json
//! {"model": "haldane-shastry", "L": 16, "chain": "ctmc", "t": 100000,
//!  "tau0": 100, "observables": [1, 5], "seed": 7}
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::CliError;

pub const MODEL: &str = "haldane-shastry";

/// A number or a list of numbers.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<String>,
    #[serde(rename = "L")]
    pub sites: Option<usize>,
    pub chain: Option<String>,
    pub t: Option<f64>,
    pub steps: Option<u64>,
    pub tau0: Option<f64>,
    pub h: Option<f64>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    pub kappa: Option<OneOrMany<f64>>,
    pub observables: Option<Vec<usize>>,
    pub chains: Option<u64>,
    pub repetitions: Option<usize>,
    pub state: Option<String>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        if let Some(m) = &cfg.model {
            if m != MODEL {
                return Err(CliError::Config(format!("unknown model {m:?}, expected {MODEL:?}")));
            }
        }
        Ok(cfg)
    }
}

/// First present value, or a configuration error naming the field.
pub fn require<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T, CliError> {
    flag.or(file)
        .ok_or_else(|| CliError::Config(format!("{name} must be given on the command line or in the config")))
}

pub fn positive(value: f64, name: &str) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {value}")))
    }
}
