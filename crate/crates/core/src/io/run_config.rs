//! Run configuration files: a TOML description of a simulation grid,
//! resolved into a [`GridSpec`]. Unknown keys are rejected so typos fail
//! loudly instead of silently running the default.

use crate::error::{CalibError, Result};
use crate::experiments::{CalibratorSpec, GridMode, GridSpec, DEFAULT_RIDGE};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    grid: GridSection,
    calibrators: CalibratorSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    mode: String,
    #[serde(default)]
    pairs: Vec<(String, String)>,
    #[serde(default)]
    combos: Vec<[(String, String); 2]>,
    auc_targets: Vec<f64>,
    #[serde(default)]
    rho_values: Vec<f64>,
    n_values: Vec<usize>,
    trials: usize,
    ind_test_size: usize,
    #[serde(default = "default_seed")]
    master_seed: u64,
    #[serde(default)]
    threads: usize,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibratorSection {
    ids: Vec<String>,
    /// Ridge penalty for the logistic entries.
    #[serde(default = "default_ridge")]
    ridge: f64,
}

fn default_ridge() -> f64 {
    DEFAULT_RIDGE
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Output directory; a command-line override wins.
    pub dir: Option<String>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| CalibError::Config(format!("bad run config: {e}")))
    }

    /// Build and validate the grid this configuration describes.
    pub fn to_grid_spec(&self) -> Result<GridSpec> {
        let mode = match self.grid.mode.as_str() {
            "single" => GridMode::Single,
            "multi" => GridMode::Multi,
            "trunc_exp" => GridMode::TruncExp,
            other => {
                return Err(CalibError::Config(format!(
                    "unknown grid mode '{other}' (expected single, multi, or trunc_exp)"
                )))
            }
        };
        let calibrators: Vec<CalibratorSpec> = self
            .calibrators
            .ids
            .iter()
            .map(|id| CalibratorSpec::parse(id, self.calibrators.ridge))
            .collect::<Result<_>>()?;
        let spec = GridSpec {
            mode,
            pairs: self.grid.pairs.clone(),
            combos: self.grid.combos.clone(),
            auc_targets: self.grid.auc_targets.clone(),
            rho_values: self.grid.rho_values.clone(),
            n_values: self.grid.n_values.clone(),
            trials: self.grid.trials,
            ind_test_size: self.grid.ind_test_size,
            calibrators,
            master_seed: self.grid.master_seed,
            threads: self.grid.threads,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLE: &str = r#"
        [grid]
        mode = "single"
        pairs = [["a", "a"], ["b", "c"]]
        auc_targets = [0.6, 0.9]
        n_values = [10, 80]
        trials = 5
        ind_test_size = 1000

        [calibrators]
        ids = ["platt", "logreg", "bin20"]
    "#;

    #[test]
    fn single_mode_config_resolves_with_defaults() {
        let cfg = RunConfig::from_toml(SINGLE).unwrap();
        let spec = cfg.to_grid_spec().unwrap();
        assert_eq!(spec.mode, GridMode::Single);
        assert_eq!(spec.pairs.len(), 2);
        assert_eq!(spec.pairs[1], ("b".to_string(), "c".to_string()));
        assert_eq!(spec.master_seed, 1);
        assert_eq!(spec.threads, 0);
        assert_eq!(spec.calibrators.len(), 3);
        assert_eq!(spec.calibrators[2].id(), "bin20");
        assert_eq!(cfg.output.dir, None);
    }

    #[test]
    fn multi_mode_config_resolves() {
        let text = r#"
            [grid]
            mode = "multi"
            combos = [[["a", "a"], ["d", "d"]]]
            auc_targets = [0.75]
            rho_values = [0.0, 0.5]
            n_values = [40]
            trials = 3
            ind_test_size = 500
            master_seed = 9
            threads = 2

            [calibrators]
            ids = ["logreg", "logreg_h1", "logreg_h2"]
            ridge = 0.01

            [output]
            dir = "runs/multi"
        "#;
        let cfg = RunConfig::from_toml(text).unwrap();
        let spec = cfg.to_grid_spec().unwrap();
        assert_eq!(spec.mode, GridMode::Multi);
        assert_eq!(spec.combos.len(), 1);
        assert_eq!(spec.master_seed, 9);
        assert_eq!(spec.threads, 2);
        match spec.calibrators[0].method {
            crate::calibrators::FitMethod::Logistic { ridge, .. } => {
                assert_eq!(ridge, 0.01)
            }
            _ => panic!("expected logistic"),
        }
        assert_eq!(cfg.output.dir.as_deref(), Some("runs/multi"));
    }

    #[test]
    fn shipped_sample_configs_resolve() {
        for text in [
            include_str!("../../../../configs/desk.toml"),
            include_str!("../../../../configs/multi-small.toml"),
            include_str!("../../../../configs/truncexp.toml"),
        ] {
            let cfg = RunConfig::from_toml(text).unwrap();
            cfg.to_grid_spec().unwrap();
            assert!(cfg.output.dir.is_some());
        }
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        let typo = SINGLE.replace("trials = 5", "trails = 5");
        assert!(matches!(
            RunConfig::from_toml(&typo),
            Err(CalibError::Config(_))
        ));
        let bad_mode = SINGLE.replace("\"single\"", "\"both\"");
        assert!(RunConfig::from_toml(&bad_mode).unwrap().to_grid_spec().is_err());
        let bad_id = SINGLE.replace("\"platt\"", "\"spline\"");
        assert!(RunConfig::from_toml(&bad_id).unwrap().to_grid_spec().is_err());
        // structurally fine but semantically inconsistent: rho outside multi
        let stray = SINGLE.replace("auc_targets = [0.6, 0.9]", "auc_targets = [0.6]\nrho_values = [0.5]");
        assert!(RunConfig::from_toml(&stray).unwrap().to_grid_spec().is_err());
    }
}
