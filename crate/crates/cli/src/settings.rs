//! Resolved run parameters. Precedence: command-line flags, then the
//! `--config` file, then built-in defaults. The seed additionally falls back
//! to `JUDGECAL_SEED` before its default of 0.

use std::path::Path;

use judgecal_core::calibrate::FitConfig;
use judgecal_core::data::GeneratorConfig;
use judgecal_core::metaeval::{SignificanceConfig, SplitConfig};
use judgecal_core::{DavidsonParams, ParamBox, Smoothing};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SEED_ENV: &str = "JUDGECAL_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSettings {
    pub restarts: usize,
    pub param_box: ParamBox,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        let d = FitConfig::default();
        FitSettings {
            restarts: d.restarts,
            param_box: d.param_box,
            max_iterations: d.max_iterations,
            gradient_tolerance: d.gradient_tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSettings {
    pub ratio: f64,
    pub splits: usize,
}

impl Default for SplitSettings {
    fn default() -> Self {
        let d = SplitConfig::default();
        SplitSettings {
            ratio: d.calibration_ratio,
            splits: d.num_splits,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignificanceSettings {
    pub resamples: usize,
    pub tau: f64,
}

impl Default for SignificanceSettings {
    fn default() -> Self {
        let d = SignificanceConfig::default();
        SignificanceSettings {
            resamples: d.resamples_per_split,
            tau: d.tau,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSettings {
    pub beta: f64,
    pub nu: f64,
    pub gamma: f64,
    pub items: usize,
    pub votes: u32,
    pub concentration: [f64; 3],
    pub order_bias: f64,
}

impl Default for GeneratorSettings {
    fn default() -> Self {
        let d = GeneratorConfig::default();
        GeneratorSettings {
            beta: d.theta_true.beta,
            nu: d.theta_true.nu,
            gamma: d.theta_true.gamma,
            items: d.num_items,
            votes: d.votes_per_item,
            concentration: d.dirichlet_concentration,
            order_bias: d.order_bias,
        }
    }
}

/// Everything a command may consult, after all overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub seed: Option<u64>,
    pub smoothing: Smoothing,
    pub fit: FitSettings,
    pub split: SplitSettings,
    pub significance: SignificanceSettings,
    pub generator: GeneratorSettings,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// The effective seed: explicit value, else the environment, else 0.
    pub fn resolve_seed(&mut self) -> Result<u64, CliError> {
        let seed = match self.seed {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer")))?,
                Err(_) => 0,
            },
        };
        self.seed = Some(seed);
        Ok(seed)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn smoothing(&self) -> Result<Smoothing, CliError> {
        Ok(Smoothing::new(self.smoothing.alpha, self.smoothing.kappa)?)
    }

    pub fn fit_config(&self) -> Result<FitConfig, CliError> {
        let cfg = FitConfig {
            param_box: self.fit.param_box,
            restarts: self.fit.restarts,
            seed: self.seed(),
            max_iterations: self.fit.max_iterations,
            gradient_tolerance: self.fit.gradient_tolerance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn split_config(&self) -> SplitConfig {
        SplitConfig {
            calibration_ratio: self.split.ratio,
            num_splits: self.split.splits,
            seed: self.seed(),
        }
    }

    pub fn significance_config(&self) -> Result<SignificanceConfig, CliError> {
        let cfg = SignificanceConfig {
            resamples_per_split: self.significance.resamples,
            tau: self.significance.tau,
            seed: self.seed(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn generator_config(&self) -> Result<GeneratorConfig, CliError> {
        let g = &self.generator;
        let cfg = GeneratorConfig {
            theta_true: DavidsonParams::new(g.beta, g.nu, g.gamma)?,
            num_items: g.items,
            votes_per_item: g.votes,
            dirichlet_concentration: g.concentration,
            order_bias: g.order_bias,
            smoothing: self.smoothing()?,
            seed: self.seed(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `a,b,c,...` into exactly `N` reals.
pub fn parse_reals<const N: usize>(text: &str) -> Result<[f64; N], String> {
    let values: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}
