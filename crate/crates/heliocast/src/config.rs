//! Run configuration: one TOML file drives every CLI command.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::armax::ArmaxOrders;
use crate::error::{Error, Result};
use crate::eval::{ForecastConfig, OrderSelection};
use crate::ingest::{CsvFormat, FillPolicy, SiteMeta};
use crate::narnn::NarnnConfig;
use crate::preprocess::{ClearSkySource, PreprocessConfig, Significance};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

fn default_schema_version() -> u32 {
    CONFIG_SCHEMA_VERSION
}

fn default_training_days() -> usize {
    30
}

fn default_detrend_degree() -> usize {
    4
}

fn default_true() -> bool {
    true
}

fn default_trend_days() -> Option<usize> {
    PreprocessConfig::default().trend_days
}

fn default_fill_policy() -> FillPolicy {
    FillPolicy::LinearInterpolate
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct NarnnSection {
    pub d: usize,
    pub hidden_units: usize,
    pub max_epochs: usize,
    pub target_loss: f64,
}

impl Default for NarnnSection {
    fn default() -> Self {
        let base = NarnnConfig::default();
        NarnnSection {
            d: base.d,
            hidden_units: base.hidden_units,
            max_epochs: base.max_epochs,
            target_loss: base.target_loss,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ArmaxSection {
    pub max_order: usize,
    /// Trailing days of fitting data used to estimate the ARMAX model.
    pub training_days: usize,
    pub selection: OrderSelection,
    /// Fixed (n, m, r); set to skip order selection.
    pub fixed_orders: Option<[usize; 3]>,
}

impl Default for ArmaxSection {
    fn default() -> Self {
        ArmaxSection {
            max_order: 6,
            training_days: 3,
            selection: OrderSelection::ErrorScan,
            fixed_orders: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AdfSection {
    /// `None` uses the floor(12 (n/100)^(1/4)) heuristic.
    pub max_lag: Option<usize>,
    pub significance: Significance,
    /// Abort instead of warn on a failed stationarity check.
    pub strict: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub site: SiteMeta,
    pub data_path: PathBuf,
    pub output_dir: PathBuf,
    /// Global seed; all stochastic choices derive from it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_training_days")]
    pub training_days: usize,
    #[serde(default = "default_true")]
    pub detrend: bool,
    #[serde(default = "default_detrend_degree")]
    pub detrend_degree: usize,
    /// Fit the trend polynomial on only the last N window days;
    /// `None` uses the whole window.
    #[serde(default = "default_trend_days")]
    pub trend_days: Option<usize>,
    #[serde(default)]
    pub narnn: NarnnSection,
    #[serde(default)]
    pub armax: ArmaxSection,
    #[serde(default)]
    pub adf: AdfSection,
    #[serde(default)]
    pub csv: CsvFormat,
    #[serde(default = "default_fill_policy")]
    pub fill_policy: FillPolicy,
    /// Optional clear-sky override table in the canonical two-column
    /// format; Haurwitz is used when absent.
    #[serde(default)]
    pub clear_sky_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let config: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if config.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported config schema version {} (expected {CONFIG_SCHEMA_VERSION})",
                config.schema_version
            )));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.training_days < 2 {
            return Err(Error::Config(
                "training_days must be >= 2 (ARMAX needs the previous day on top of Stage-1 history)".into(),
            ));
        }
        if self.detrend && self.detrend_degree > 8 {
            return Err(Error::Config("detrend_degree must be in 0..=8".into()));
        }
        if self.armax.training_days < 2 || self.armax.training_days > self.training_days {
            return Err(Error::Config(
                "armax.training_days must be in 2..=training_days".into(),
            ));
        }
        if let Some([n, m, _]) = self.armax.fixed_orders {
            if n < 1 || m < 1 {
                return Err(Error::Config("armax.fixed_orders needs n >= 1 and m >= 1".into()));
            }
        }
        self.narnn_config().validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// Seed for Stage-1 weight initialization, split off the global seed
    /// so component-level reruns stay stable.
    pub fn narnn_seed(&self) -> u64 {
        self.seed ^ 0x4e41_524e // "NARN"
    }

    pub fn narnn_config(&self) -> NarnnConfig {
        NarnnConfig {
            d: self.narnn.d,
            hidden_units: self.narnn.hidden_units,
            max_epochs: self.narnn.max_epochs,
            target_loss: self.narnn.target_loss,
            seed: self.narnn_seed(),
        }
    }

    pub fn preprocess_config(&self, clear_sky: ClearSkySource) -> PreprocessConfig {
        PreprocessConfig {
            detrend_degree: self.detrend.then_some(self.detrend_degree),
            trend_days: self.trend_days,
            adf_max_lag: self.adf.max_lag,
            adf_significance: self.adf.significance,
            adf_strict: self.adf.strict,
            run_adf: true,
            clear_sky,
        }
    }

    pub fn forecast_config(&self, clear_sky: ClearSkySource) -> ForecastConfig {
        ForecastConfig {
            training_days: self.training_days,
            narnn: self.narnn_config(),
            armax_training_days: self.armax.training_days,
            max_order: self.armax.max_order,
            fixed_orders: self
                .armax
                .fixed_orders
                .map(|[n, m, r]| ArmaxOrders { n, m, r }),
            selection: self.armax.selection,
            preprocess: self.preprocess_config(clear_sky),
        }
    }
}
