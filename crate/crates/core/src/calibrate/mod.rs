//! Fitting `(beta, nu, gamma)` by minimizing mean DRPS on a labeled
//! calibration set.
//!
//! The solver works in `(beta, ln nu, gamma)` because the `nu` box spans seven
//! orders of magnitude. Restart 0 always starts from `(1, 1, 1)`; the others
//! draw `beta` and `gamma` uniformly and `nu` log-uniformly inside the box,
//! each from its own derived seed, so the result does not depend on thread
//! scheduling.

mod lbfgsb;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::btd::{cdf_indicators, davidson_probs, drps, softmax3, DavidsonParams, FeaturePair, ParamBox, Verdict};
use crate::error::{Error, Result};
use crate::seed::stream_rng;

/// One labeled calibration example.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationItem {
    pub features: FeaturePair,
    pub truth: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub param_box: ParamBox,
    pub restarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            param_box: ParamBox::default(),
            restarts: 8,
            seed: 0,
            max_iterations: 200,
            gradient_tolerance: 1e-8,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::invalid("restarts must be at least 1"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.gradient_tolerance.is_finite() && self.gradient_tolerance > 0.0) {
            return Err(Error::invalid("gradient_tolerance must be positive"));
        }
        ParamBox::from_array(self.param_box.to_array()).map(|_| ())
    }

    pub fn with_seed(&self, seed: u64) -> FitConfig {
        FitConfig {
            seed,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: DavidsonParams,
    /// Mean DRPS over the calibration set.
    pub objective: f64,
    pub restart_index: usize,
    pub converged: bool,
    /// Quasi-Newton iterations taken (0 for grid results).
    pub iterations: usize,
}

/// The winning fit together with every restart's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub best: FitResult,
    pub restarts: Vec<FitResult>,
}

/// Mean DRPS of `params` over the calibration set.
pub fn mean_drps(items: &[CalibrationItem], params: &DavidsonParams) -> f64 {
    let total: f64 = items
        .iter()
        .map(|item| drps(&davidson_probs(&item.features, params), item.truth))
        .sum();
    total / items.len() as f64
}

/// Mean DRPS and its gradient with respect to `(beta, ln nu, gamma)`.
pub fn objective_and_gradient(items: &[CalibrationItem], x: &[f64]) -> (f64, [f64; 3]) {
    let (beta, log_nu, gamma) = (x[0], x[1], x[2]);
    let mut value = 0.0;
    let mut grad = [0.0; 3];
    for item in items {
        let FeaturePair { s, t } = item.features;
        let [p_minus, p_tie, p_plus] = softmax3(beta * s, log_nu + gamma * t);
        let (h_minus, h_tie) = cdf_indicators(item.truth);
        let a = p_minus - h_minus;
        let b = p_minus + p_tie - h_tie;
        value += a * a + b * b;

        // d logits / d x for logits (-beta s, ln nu + gamma t, beta s)
        let dz = [[-s, 0.0, s], [0.0, 1.0, 0.0], [0.0, t, 0.0]];
        for (j, dzj) in dz.iter().enumerate() {
            let mean = p_minus * dzj[0] + p_tie * dzj[1] + p_plus * dzj[2];
            let dp_minus = p_minus * (dzj[0] - mean);
            let dp_tie = p_tie * (dzj[1] - mean);
            grad[j] += 2.0 * (a + b) * dp_minus + 2.0 * b * dp_tie;
        }
    }
    let n = items.len() as f64;
    (value / n, grad.map(|g| g / n))
}

fn internal_bounds(param_box: &ParamBox) -> ([f64; 3], [f64; 3]) {
    (
        [param_box.beta.lo, param_box.nu.lo.ln(), param_box.gamma.lo],
        [param_box.beta.hi, param_box.nu.hi.ln(), param_box.gamma.hi],
    )
}

fn restart_start(config: &FitConfig, index: usize) -> [f64; 3] {
    let (lo, hi) = internal_bounds(&config.param_box);
    if index == 0 {
        return [1.0, 0.0, 1.0];
    }
    let mut rng = stream_rng(config.seed, "restart", index as u64);
    [
        rng.random_range(lo[0]..=hi[0]),
        rng.random_range(lo[1]..=hi[1]),
        rng.random_range(lo[2]..=hi[2]),
    ]
}

fn check_items(items: &[CalibrationItem]) -> Result<()> {
    if items.is_empty() {
        return Err(Error::EmptyCalibrationSet);
    }
    Ok(())
}

fn to_params(x: &[f64], param_box: &ParamBox) -> DavidsonParams {
    // exp(ln nu) can leave the box by one ulp
    param_box.clamp(&DavidsonParams {
        beta: x[0],
        nu: x[1].exp(),
        gamma: x[2],
    })
}

/// Fits the model and returns every restart alongside the best one.
pub fn fit_drps_report(items: &[CalibrationItem], config: &FitConfig) -> Result<FitReport> {
    check_items(items)?;
    config.validate()?;
    let (lo, hi) = internal_bounds(&config.param_box);
    let options = lbfgsb::Options {
        max_iterations: config.max_iterations,
        gradient_tolerance: config.gradient_tolerance,
    };

    let restarts: Vec<FitResult> = (0..config.restarts)
        .into_par_iter()
        .map(|index| {
            let start = restart_start(config, index);
            let minimum = lbfgsb::minimize(
                |x| {
                    let (f, g) = objective_and_gradient(items, x);
                    (f, g.to_vec())
                },
                &start,
                &lo,
                &hi,
                &options,
            )
            .map_err(|e| Error::NonFiniteObjective([e.0[0], e.0[1].exp(), e.0[2]]))?;
            let params = to_params(&minimum.x, &config.param_box);
            let objective = mean_drps(items, &params);
            if !objective.is_finite() {
                return Err(Error::NonFiniteObjective([params.beta, params.nu, params.gamma]));
            }
            Ok(FitResult {
                params,
                objective,
                restart_index: index,
                converged: minimum.converged,
                iterations: minimum.iterations,
            })
        })
        .collect::<Result<_>>()?;

    let best = *restarts
        .iter()
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .expect("at least one restart");
    Ok(FitReport { best, restarts })
}

/// Fits `(beta, nu, gamma)` by minimizing mean DRPS; returns the best restart.
pub fn fit_drps(items: &[CalibrationItem], config: &FitConfig) -> Result<FitResult> {
    fit_drps_report(items, config).map(|report| report.best)
}

/// Axis values of the verification grid: linear in `beta` and `gamma`,
/// log-spaced in `nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub beta: Vec<f64>,
    pub nu: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Grid {
    pub fn new(param_box: &ParamBox, resolution: usize) -> Result<Grid> {
        if resolution < 3 {
            return Err(Error::invalid("grid resolution must be at least 3"));
        }
        let linspace = |lo: f64, hi: f64| -> Vec<f64> {
            (0..resolution)
                .map(|i| lo + (hi - lo) * i as f64 / (resolution - 1) as f64)
                .collect()
        };
        Ok(Grid {
            beta: linspace(param_box.beta.lo, param_box.beta.hi),
            nu: linspace(param_box.nu.lo.ln(), param_box.nu.hi.ln())
                .into_iter()
                .map(f64::exp)
                .collect(),
            gamma: linspace(param_box.gamma.lo, param_box.gamma.hi),
        })
    }

    /// Cell widths in `(beta, ln nu, gamma)`.
    pub fn spacing(&self) -> [f64; 3] {
        [
            self.beta[1] - self.beta[0],
            self.nu[1].ln() - self.nu[0].ln(),
            self.gamma[1] - self.gamma[0],
        ]
    }
}

/// Exhaustive search over a `resolution^3` grid spanning the box.
///
/// Meant as an independent check on [`fit_drps`], not for production fits.
pub fn grid_oracle(items: &[CalibrationItem], param_box: &ParamBox, resolution: usize) -> Result<FitResult> {
    check_items(items)?;
    let grid = Grid::new(param_box, resolution)?;
    let r = resolution;
    let objectives: Vec<f64> = (0..r * r * r)
        .into_par_iter()
        .map(|flat| {
            let params = DavidsonParams {
                beta: grid.beta[flat / (r * r)],
                nu: grid.nu[(flat / r) % r],
                gamma: grid.gamma[flat % r],
            };
            mean_drps(items, &params)
        })
        .collect();

    let mut best = 0;
    for (i, value) in objectives.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFiniteObjective([
                grid.beta[i / (r * r)],
                grid.nu[(i / r) % r],
                grid.gamma[i % r],
            ]));
        }
        if *value < objectives[best] {
            best = i;
        }
    }
    Ok(FitResult {
        params: DavidsonParams {
            beta: grid.beta[best / (r * r)],
            nu: grid.nu[(best / r) % r],
            gamma: grid.gamma[best % r],
        },
        objective: objectives[best],
        restart_index: 0,
        converged: true,
        iterations: 0,
    })
}
