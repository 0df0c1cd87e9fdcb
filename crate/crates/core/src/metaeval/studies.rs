//! Confusion matrices, calibration-size sweeps, cross-task transfer and the
//! presentation-order study.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{calibration_items, mean_ci95, partition, EvalItem, LabeledPrediction, SplitConfig};
use crate::btd::{BtdModel, Smoothing, Verdict, VoteCounts};
use crate::calibrate::{fit_drps, FitConfig};
use crate::data::{ItemVotes, Order};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Rows are true labels and columns predicted labels, both in `(-1, 0, +1)`
/// order. Counts are `f64` so reports can be averaged over splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionReport {
    pub counts: [[f64; 3]; 3],
    /// Each row as percentages of that row's total (zero rows stay zero).
    pub row_percent: [[f64; 3]; 3],
    pub predicted_histogram: [f64; 3],
}

impl ConfusionReport {
    fn from_counts(counts: [[f64; 3]; 3]) -> Self {
        let row_percent = counts.map(|row| {
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                row.map(|c| 100.0 * c / total)
            } else {
                [0.0; 3]
            }
        });
        let mut predicted_histogram = [0.0; 3];
        for row in &counts {
            for (h, c) in predicted_histogram.iter_mut().zip(row) {
                *h += c;
            }
        }
        ConfusionReport {
            counts,
            row_percent,
            predicted_histogram,
        }
    }

    /// Cell-wise mean of several reports (mean example counts).
    pub fn mean(reports: &[ConfusionReport]) -> Result<ConfusionReport> {
        if reports.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut counts = [[0.0; 3]; 3];
        for r in reports {
            for (i, row) in r.counts.iter().enumerate() {
                for (j, c) in row.iter().enumerate() {
                    counts[i][j] += c;
                }
            }
        }
        let n = reports.len() as f64;
        Ok(ConfusionReport::from_counts(counts.map(|row| row.map(|c| c / n))))
    }
}

pub fn confusion_report(preds: &[LabeledPrediction]) -> Result<ConfusionReport> {
    if preds.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts = [[0.0; 3]; 3];
    for p in preds {
        counts[p.truth.index()][p.predicted.index()] += 1.0;
    }
    Ok(ConfusionReport::from_counts(counts))
}

fn btd_mae(model: &BtdModel, items: &[EvalItem], indices: &[usize]) -> f64 {
    let total: u32 = indices
        .iter()
        .map(|&i| u32::from(model.predict(&items[i].counts).distance(items[i].truth)))
        .sum();
    f64::from(total) / indices.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub size: usize,
    pub mean_mae: f64,
    pub mae_ci95: f64,
}

/// Mean evaluation MAE of the calibrated model for each calibration size.
///
/// One pool of `max(sizes)` items is drawn once; its complement is the fixed
/// evaluation set. For every size, `split.num_splits` calibration sets of
/// that size are drawn from the pool.
pub fn calibration_size_sweep(
    items: &[EvalItem],
    sizes: &[usize],
    split: &SplitConfig,
    fit: &FitConfig,
    smoothing: &Smoothing,
) -> Result<Vec<SweepPoint>> {
    let largest = *sizes.iter().max().ok_or(Error::EmptyInput)?;
    if sizes.contains(&0) {
        return Err(Error::invalid("calibration sizes must be positive"));
    }
    if largest + 1 > items.len() {
        return Err(Error::InsufficientData(format!(
            "calibration size {largest} leaves no evaluation items out of {}",
            items.len()
        )));
    }
    if split.num_splits == 0 {
        return Err(Error::invalid("num_splits must be positive"));
    }
    let (pool, evaluation) = partition(items.len(), largest, split.seed, "sweep-pool", 0);

    sizes
        .iter()
        .map(|&size| {
            let maes = (0..split.num_splits)
                .into_par_iter()
                .map(|k| {
                    let draw_seed = derive_seed(split.seed, "sweep-size", size as u64);
                    let (chosen, _) = partition(pool.len(), size, draw_seed, "sweep-draw", k as u64);
                    let calib: Vec<&EvalItem> = chosen.iter().map(|&c| &items[pool[c]]).collect();
                    let fitted = fit_drps(
                        &calibration_items(&calib, smoothing),
                        &fit.with_seed(derive_seed(fit.seed, "sweep-fit", k as u64)),
                    )?;
                    Ok(btd_mae(&BtdModel::new(fitted.params, *smoothing), items, &evaluation))
                })
                .collect::<Result<Vec<f64>>>()?;
            let (mean_mae, mae_ci95) = mean_ci95(&maes);
            Ok(SweepPoint {
                size,
                mean_mae,
                mae_ci95,
            })
        })
        .collect()
}

/// A named labeled dataset for transfer studies.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub name: String,
    pub items: Vec<EvalItem>,
}

/// `delta[source][target]`: MAE on the target's evaluation split using the
/// source's fit, minus the target's in-domain MAE. Averaged over splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    pub tasks: Vec<String>,
    pub delta: Vec<Vec<f64>>,
}

pub fn transfer_matrix(
    tasks: &[Task],
    split: &SplitConfig,
    fit: &FitConfig,
    smoothing: &Smoothing,
) -> Result<TransferMatrix> {
    if tasks.len() < 2 {
        return Err(Error::InsufficientData("transfer needs at least two tasks".into()));
    }
    for task in tasks {
        split.calibration_size(task.items.len())?;
    }
    let t = tasks.len();
    let per_split: Vec<Vec<Vec<f64>>> = (0..split.num_splits)
        .into_par_iter()
        .map(|k| {
            let mut models = Vec::with_capacity(t);
            let mut evaluations = Vec::with_capacity(t);
            for (ti, task) in tasks.iter().enumerate() {
                let task_seed = derive_seed(split.seed, "transfer-task", ti as u64);
                let size = split.calibration_size(task.items.len())?;
                let (calibration, evaluation) = partition(task.items.len(), size, task_seed, "split", k as u64);
                let calib: Vec<&EvalItem> = calibration.iter().map(|&i| &task.items[i]).collect();
                let fitted = fit_drps(
                    &calibration_items(&calib, smoothing),
                    &fit.with_seed(derive_seed(fit.seed, "transfer-fit", (k * t + ti) as u64)),
                )?;
                models.push(BtdModel::new(fitted.params, *smoothing));
                evaluations.push(evaluation);
            }
            let mut delta = vec![vec![0.0; t]; t];
            for target in 0..t {
                let in_domain = btd_mae(&models[target], &tasks[target].items, &evaluations[target]);
                for source in 0..t {
                    if source != target {
                        delta[source][target] =
                            btd_mae(&models[source], &tasks[target].items, &evaluations[target]) - in_domain;
                    }
                }
            }
            Ok(delta)
        })
        .collect::<Result<_>>()?;

    let n = per_split.len() as f64;
    let mut delta = vec![vec![0.0; t]; t];
    for d in &per_split {
        for (row, drow) in delta.iter_mut().zip(d) {
            for (cell, v) in row.iter_mut().zip(drow) {
                *cell += v / n;
            }
        }
    }
    Ok(TransferMatrix {
        tasks: tasks.iter().map(|task| task.name.clone()).collect(),
        delta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderBalance {
    pub first_only_mae: f64,
    pub second_only_mae: f64,
    pub balanced_mae: f64,
    /// Votes per item in each arm.
    pub votes_per_arm: usize,
}

/// Compares aggregation over `AB`-only votes, `BA`-only votes and a half/half
/// mix with the same per-item budget `m` (the smaller of the two order
/// counts across all items). The balanced arm takes the first `ceil(m/2)`
/// `AB` votes and the first `floor(m/2)` `BA` votes by sample index.
pub fn order_balance_report<F>(items: &[(ItemVotes, Verdict)], aggregate: F) -> Result<OrderBalance>
where
    F: Fn(&VoteCounts) -> Verdict,
{
    if items.is_empty() {
        return Err(Error::EmptyInput);
    }
    let split: Vec<(Vec<Verdict>, Vec<Verdict>)> = items
        .iter()
        .map(|(votes, _)| {
            let ab = votes.labels_for(Order::AB);
            let ba = votes.labels_for(Order::BA);
            if ab.is_empty() || ba.is_empty() {
                return Err(Error::MissingOrder(votes.item_id.clone()));
            }
            Ok((ab, ba))
        })
        .collect::<Result<_>>()?;
    let budget = split.iter().map(|(ab, ba)| ab.len().min(ba.len())).min().unwrap_or(0);

    let mut totals = [0u32; 3];
    for ((ab, ba), (_, truth)) in split.iter().zip(items) {
        let arms = [
            VoteCounts::from_verdicts(ab[..budget].iter().copied())?,
            VoteCounts::from_verdicts(ba[..budget].iter().copied())?,
            VoteCounts::from_verdicts(
                ab[..budget.div_ceil(2)]
                    .iter()
                    .chain(&ba[..budget / 2])
                    .copied(),
            )?,
        ];
        for (total, counts) in totals.iter_mut().zip(&arms) {
            *total += u32::from(aggregate(counts).distance(*truth));
        }
    }
    let n = items.len() as f64;
    Ok(OrderBalance {
        first_only_mae: f64::from(totals[0]) / n,
        second_only_mae: f64::from(totals[1]) / n,
        balanced_mae: f64::from(totals[2]) / n,
        votes_per_arm: budget,
    })
}
