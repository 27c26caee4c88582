use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use takiff_toda::serial::Entry;
use takiff_toda::toda::{Direction, Formulation, Method};

use crate::error::CliError;

pub const SEED_ENV: &str = "TAKIFF_TODA_SEED";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Subcommand to run when none is given on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formulation: Option<Formulation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<OutputConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraConfig {
    #[serde(rename = "type", default = "default_series")]
    pub series: String,
    pub rank: usize,
    #[serde(default)]
    pub l: usize,
}

fn default_series() -> String {
    "A".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialData {
    Raw { rho: Vec<Vec<f64>>, gamma: Vec<Vec<f64>> },
    Canonical { rho0: Vec<f64>, rho1: Vec<f64>, phi0: Vec<f64>, phi1: Vec<f64> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// Command-line seed, then the environment, then the config file, then 0.
    pub fn resolve_seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        if let Some(s) = flag {
            return Ok(s);
        }
        if let Ok(v) = std::env::var(SEED_ENV) {
            return v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v} is not an unsigned integer")));
        }
        Ok(self.seed.unwrap_or(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let cfg = ExperimentConfig {
            command: Some("simulate".into()),
            algebra: Some(AlgebraConfig { series: "A".into(), rank: 2, l: 1 }),
            formulation: Some(Formulation::Lax),
            initial: Some(InitialData::Raw {
                rho: vec![vec![0.1, -0.2], vec![0.3, 0.4]],
                gamma: vec![vec![0.5, 0.6], vec![0.7, 0.8]],
            }),
            integrator: Some(IntegratorConfig {
                t_end: Some(2.5),
                dt: Some(1e-3),
                method: Some(Method::Rk45),
                direction: Some(Direction::Backward),
                abs_tol: Some(1e-11),
                rel_tol: None,
                stride: Some(4),
            }),
            element: None,
            series: Some(SeriesConfig { a0: Some(0.1), order: Some(30), ..Default::default() }),
            outputs: Some(OutputConfig { path: Some("out.csv".into()) }),
            seed: Some(42),
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn canonical_initial_data_parses() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"initial": {"rho0": [1], "rho1": [0], "phi0": [0], "phi1": [0.5]}}"#,
        )
        .unwrap();
        assert!(matches!(cfg.initial, Some(InitialData::Canonical { .. })));
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
