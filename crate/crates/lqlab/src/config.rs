//! Experiment configuration: a JSON file driving every command, echoed into
//! each run's output directory.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::dataset::{Scheme, DEFAULT_K, DEFAULT_SENTINEL_DBM};
use crate::error::{Error, Result};
use crate::predictors::PredictorConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub channel: ChannelParams,
    /// Input window length in broadcast cycles.
    pub k: usize,
    /// RSSI recorded for lost packets.
    pub sentinel_dbm: f64,
    /// Master seed; every derived stream hangs off it.
    pub seed: u64,
    /// Fraction of samples used for training.
    pub train_fraction: f64,
    /// Environment (distance bin) width as a fraction of r0.
    pub bin_width_r0: f64,
    /// Upper end of the distance range as a multiple of r0.
    pub d_max_r0: f64,
    /// Total samples for mixed-distance datasets (table, dynamic sweep,
    /// filter training).
    pub total_samples: usize,
    /// Samples per distance for single-distance experiments (static sweep,
    /// randomness curve empirical estimates).
    pub samples_per_env: usize,
    /// Number of grid points for distance curves.
    pub grid_points: usize,
    /// Number of distances in the static sweep (trains a model per point).
    pub static_points: usize,
    /// Monte Carlo cycles per grid point in the filter sweep.
    pub cycles_per_point: usize,
    /// Number of mixture levels in the dynamic sweep.
    pub dynamic_levels: usize,
    /// Randomness threshold for the unstable-region extraction.
    pub u_threshold: f64,
    /// Models compared by the `table` command.
    pub predictors: Vec<PredictorConfig>,
    /// Model trained per point in the two-class sweeps and the filter demo.
    pub sweep_predictor_two: PredictorConfig,
    /// Model trained per point in the four-class sweeps.
    pub sweep_predictor_four: PredictorConfig,
    /// Scheme for dataset/model lifecycle commands.
    pub scheme: Scheme,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            channel: ChannelParams::default(),
            k: DEFAULT_K,
            sentinel_dbm: DEFAULT_SENTINEL_DBM,
            seed: 42,
            train_fraction: 0.7,
            bin_width_r0: 0.05,
            d_max_r0: 2.5,
            total_samples: 10_000,
            samples_per_env: 2_000,
            grid_points: 100,
            static_points: 25,
            cycles_per_point: 10_000,
            dynamic_levels: 11,
            u_threshold: 0.5,
            predictors: PredictorConfig::default_suite(),
            sweep_predictor_two: PredictorConfig::default_mlp(),
            sweep_predictor_four: PredictorConfig::default_gbdt(),
            scheme: Scheme::TwoClass,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{path:?}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config("train_fraction must be in (0,1)".into()));
        }
        if !(self.bin_width_r0 > 0.0 && self.d_max_r0 > 0.0) {
            return Err(Error::Config("bin_width_r0 and d_max_r0 must be > 0".into()));
        }
        if self.total_samples == 0 || self.samples_per_env == 0 {
            return Err(Error::Config("sample counts must be >= 1".into()));
        }
        if self.grid_points == 0 || self.static_points == 0 || self.cycles_per_point == 0 {
            return Err(Error::Config("grid sizes must be >= 1".into()));
        }
        if self.dynamic_levels < 2 {
            return Err(Error::Config("dynamic_levels must be >= 2".into()));
        }
        if !(0.0..=1.0).contains(&self.u_threshold) {
            return Err(Error::Config("u_threshold must be in [0,1]".into()));
        }
        if self.predictors.is_empty() {
            return Err(Error::Config("predictors must be non-empty".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
