//! Evaluation protocol: metrics, repeated calibration/evaluation splits,
//! significance clustering and the auxiliary studies built on them.

mod loo;
mod significance;
mod studies;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{ci_sc, majority_vote, rounded_median, soft_sc, ConfidentVote, SoftReducer};
use crate::btd::{compute_features, mae_risks, BtdModel, DavidsonParams, Smoothing, TernaryDistribution, Verdict, VoteCounts};
use crate::calibrate::{fit_drps, CalibrationItem, FitConfig, FitResult};
use crate::data::ItemVotes;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, stream_rng};

pub use loo::{leave_one_out, LooReport, LooRow, RatingMatrix};
pub use significance::{
    paired_permutation_test, pooled_permutation_test, rank_clusters, top_cluster, ScoreDirection, SignificanceConfig,
};
pub use studies::{
    calibration_size_sweep, confusion_report, order_balance_report, transfer_matrix, ConfusionReport, OrderBalance,
    SweepPoint, Task, TransferMatrix,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPrediction {
    pub item_id: String,
    pub predicted: Verdict,
    pub truth: Verdict,
}

/// Mean absolute error between predicted and true labels, in `[0, 2]`.
pub fn mae(preds: &[LabeledPrediction]) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::EmptyInput);
    }
    let total: u32 = preds.iter().map(|p| u32::from(p.predicted.distance(p.truth))).sum();
    Ok(f64::from(total) / preds.len() as f64)
}

/// Fraction of exact label matches.
pub fn pairwise_accuracy(preds: &[LabeledPrediction]) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::EmptyInput);
    }
    let hits = preds.iter().filter(|p| p.predicted == p.truth).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Expected MAE of the Bayes action when labels follow `dists` exactly.
pub fn bayes_mae(dists: &[TernaryDistribution]) -> Result<f64> {
    if dists.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(dists.iter().map(|d| mae_risks(d).min()).sum::<f64>() / dists.len() as f64)
}

/// Mean and 95% half-width (1.96 standard errors).
pub fn mean_ci95(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub calibration_ratio: f64,
    pub num_splits: usize,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            calibration_ratio: 0.05,
            num_splits: 100,
            seed: 0,
        }
    }
}

impl SplitConfig {
    /// Calibration-set size for `n` items; leaves at least one item to evaluate.
    pub fn calibration_size(&self, n: usize) -> Result<usize> {
        if !(self.calibration_ratio > 0.0 && self.calibration_ratio < 1.0) {
            return Err(Error::invalid("calibration ratio must lie in (0, 1)"));
        }
        if self.num_splits == 0 {
            return Err(Error::invalid("num_splits must be positive"));
        }
        let size = (self.calibration_ratio * n as f64).round() as usize;
        if size == 0 || size >= n {
            return Err(Error::InsufficientData(format!(
                "{n} items give a calibration set of {size} at ratio {}",
                self.calibration_ratio
            )));
        }
        Ok(size)
    }

    /// Calibration and evaluation indices (both ascending) of split `k`.
    pub fn draw(&self, n: usize, k: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        let size = self.calibration_size(n)?;
        Ok(partition(n, size, self.seed, "split", k as u64))
    }
}

/// Samples `size` of `0..n` without replacement; returns (chosen, rest).
pub(crate) fn partition(n: usize, size: usize, seed: u64, stream: &str, index: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = stream_rng(seed, stream, index);
    let mut chosen = sample(&mut rng, n, size).into_vec();
    chosen.sort_unstable();
    let mut mask = vec![false; n];
    chosen.iter().for_each(|&i| mask[i] = true);
    let rest = (0..n).filter(|&i| !mask[i]).collect();
    (chosen, rest)
}

/// One labeled item as seen by the aggregators.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalItem {
    pub item_id: String,
    pub counts: VoteCounts,
    /// Canonical labels in sample order; may be empty for count-only data.
    pub samples: Vec<Verdict>,
    pub confident: Option<Vec<ConfidentVote>>,
    pub truth: Verdict,
}

impl EvalItem {
    pub fn from_counts(item_id: impl Into<String>, counts: VoteCounts, truth: Verdict) -> Self {
        EvalItem {
            item_id: item_id.into(),
            counts,
            samples: Vec::new(),
            confident: None,
            truth,
        }
    }

    pub fn from_votes(votes: &ItemVotes, truth: Verdict) -> Result<Self> {
        let mut records: Vec<_> = votes.records.iter().collect();
        records.sort_by_key(|r| r.sample_index);
        Ok(EvalItem {
            item_id: votes.item_id.clone(),
            counts: votes.counts()?,
            samples: records.into_iter().map(crate::data::canonicalize).collect(),
            confident: votes.confident_votes().ok(),
            truth,
        })
    }

    fn confident_votes(&self) -> Result<&[ConfidentVote]> {
        self.confident
            .as_deref()
            .ok_or_else(|| Error::MissingConfidence(self.item_id.clone()))
    }
}

/// Calibration items built from the given evaluation items.
pub fn calibration_items(items: &[&EvalItem], smoothing: &Smoothing) -> Vec<CalibrationItem> {
    items
        .iter()
        .map(|item| CalibrationItem {
            features: compute_features(&item.counts, smoothing),
            truth: item.truth,
        })
        .collect()
}

/// An aggregation rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Method {
    /// Davidson model refitted on each calibration split.
    Btd { smoothing: Smoothing },
    /// Davidson model with fixed parameters.
    BtdFixed { params: DavidsonParams, smoothing: Smoothing },
    Sc,
    SoftSc { reducer: SoftReducer },
    CiSc,
    /// Rounded median of exactly two samples.
    Median,
}

impl Method {
    pub fn needs_calibration(&self) -> bool {
        matches!(self, Method::Btd { .. })
    }

    /// Predicts one item. `fitted` supplies the model for [`Method::Btd`].
    pub fn predict(&self, item: &EvalItem, fitted: Option<&DavidsonParams>) -> Result<Verdict> {
        match self {
            Method::Btd { smoothing } => {
                let params = fitted.ok_or_else(|| Error::invalid("calibrated method used without a fit"))?;
                Ok(BtdModel::new(*params, *smoothing).predict(&item.counts))
            }
            Method::BtdFixed { params, smoothing } => Ok(BtdModel::new(*params, *smoothing).predict(&item.counts)),
            Method::Sc => Ok(majority_vote(&item.counts)),
            Method::SoftSc { reducer } => soft_sc(item.confident_votes()?, *reducer),
            Method::CiSc => ci_sc(item.confident_votes()?),
            Method::Median => match item.samples.as_slice() {
                [a, b] => Ok(rounded_median(*a, *b)),
                other => Err(Error::invalid(format!(
                    "rounded median needs exactly two samples, item {:?} has {}",
                    item.item_id,
                    other.len()
                ))),
            },
        }
    }
}

/// A method under a display name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodBinding {
    pub id: String,
    pub method: Method,
}

impl MethodBinding {
    pub fn new(id: impl Into<String>, method: Method) -> Self {
        MethodBinding { id: id.into(), method }
    }
}

/// Per-split MAE and pairwise accuracy of one method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitScore {
    pub split: usize,
    pub mae: f64,
    pub pairwise_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitRun {
    pub calibration: Vec<usize>,
    pub evaluation: Vec<usize>,
    /// `predictions[m][i]` is method `m`'s verdict on `evaluation[i]`.
    pub predictions: Vec<Vec<Verdict>>,
    pub fits: Vec<Option<FitResult>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitsOutcome {
    pub method_ids: Vec<String>,
    pub truths: Vec<Verdict>,
    pub splits: Vec<SplitRun>,
}

impl SplitsOutcome {
    pub fn method_index(&self, id: &str) -> Option<usize> {
        self.method_ids.iter().position(|m| m == id)
    }

    /// `|predicted - truth|` on split `k`'s evaluation items.
    pub fn absolute_losses(&self, method: usize, k: usize) -> Vec<f64> {
        let split = &self.splits[k];
        split.predictions[method]
            .iter()
            .zip(&split.evaluation)
            .map(|(p, &i)| f64::from(p.distance(self.truths[i])))
            .collect()
    }

    /// `1 - 1{predicted == truth}` on split `k`'s evaluation items.
    pub fn mismatch_losses(&self, method: usize, k: usize) -> Vec<f64> {
        let split = &self.splits[k];
        split.predictions[method]
            .iter()
            .zip(&split.evaluation)
            .map(|(p, &i)| if *p == self.truths[i] { 0.0 } else { 1.0 })
            .collect()
    }

    pub fn scores(&self, method: usize) -> Vec<SplitScore> {
        (0..self.splits.len())
            .map(|k| {
                let abs = self.absolute_losses(method, k);
                let miss = self.mismatch_losses(method, k);
                let n = abs.len() as f64;
                SplitScore {
                    split: k,
                    mae: abs.iter().sum::<f64>() / n,
                    pairwise_accuracy: 1.0 - miss.iter().sum::<f64>() / n,
                }
            })
            .collect()
    }

    /// Means, confidence half-widths, pairwise p-values and cluster ranks.
    pub fn summarize(&self, cfg: &SignificanceConfig) -> Result<EvaluationSummary> {
        let m = self.method_ids.len();
        let mut p_mae = vec![vec![1.0; m]; m];
        let mut p_pa = vec![vec![1.0; m]; m];
        for a in 0..m {
            for b in (a + 1)..m {
                let abs: Vec<_> = (0..self.splits.len())
                    .map(|k| (self.absolute_losses(a, k), self.absolute_losses(b, k)))
                    .collect();
                let miss: Vec<_> = (0..self.splits.len())
                    .map(|k| (self.mismatch_losses(a, k), self.mismatch_losses(b, k)))
                    .collect();
                p_mae[a][b] = pooled_permutation_test(&abs, cfg)?;
                p_mae[b][a] = p_mae[a][b];
                p_pa[a][b] = pooled_permutation_test(&miss, cfg)?;
                p_pa[b][a] = p_pa[a][b];
            }
        }

        let per_method: Vec<(f64, f64, f64, f64)> = (0..m)
            .map(|i| {
                let scores = self.scores(i);
                let maes: Vec<f64> = scores.iter().map(|s| s.mae).collect();
                let pas: Vec<f64> = scores.iter().map(|s| s.pairwise_accuracy).collect();
                let (mae_mean, mae_ci) = mean_ci95(&maes);
                let (pa_mean, pa_ci) = mean_ci95(&pas);
                (mae_mean, mae_ci, pa_mean, pa_ci)
            })
            .collect();

        let mae_means: Vec<f64> = per_method.iter().map(|s| s.0).collect();
        let pa_means: Vec<f64> = per_method.iter().map(|s| s.2).collect();
        let mae_ranks = rank_clusters(&mae_means, &p_mae, cfg.tau, ScoreDirection::LowerIsBetter);
        let pa_ranks = rank_clusters(&pa_means, &p_pa, cfg.tau, ScoreDirection::HigherIsBetter);

        let methods = (0..m)
            .map(|i| MethodScore {
                method_id: self.method_ids[i].clone(),
                mae: per_method[i].0,
                mae_ci95: per_method[i].1,
                pairwise_accuracy: per_method[i].2,
                pa_ci95: per_method[i].3,
                rank: mae_ranks[i],
                in_top_cluster: mae_ranks[i] == 1,
                pa_rank: pa_ranks[i],
                pa_in_top_cluster: pa_ranks[i] == 1,
            })
            .collect();
        Ok(EvaluationSummary {
            methods,
            p_values_mae: p_mae,
            p_values_pa: p_pa,
        })
    }
}

/// Averages over splits for one method. `rank`/`in_top_cluster` cluster on
/// MAE; the `pa_*` pair clusters on pairwise accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScore {
    pub method_id: String,
    pub mae: f64,
    pub mae_ci95: f64,
    pub pairwise_accuracy: f64,
    pub pa_ci95: f64,
    pub rank: usize,
    pub in_top_cluster: bool,
    pub pa_rank: usize,
    pub pa_in_top_cluster: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSummary {
    pub methods: Vec<MethodScore>,
    pub p_values_mae: Vec<Vec<f64>>,
    pub p_values_pa: Vec<Vec<f64>>,
}

/// Fits every calibrated method on `calibration` with a per-split seed.
fn fit_methods(
    items: &[EvalItem],
    calibration: &[usize],
    methods: &[MethodBinding],
    fit: &FitConfig,
    fit_seed: u64,
) -> Result<Vec<Option<FitResult>>> {
    let calib: Vec<&EvalItem> = calibration.iter().map(|&i| &items[i]).collect();
    methods
        .iter()
        .map(|binding| match &binding.method {
            Method::Btd { smoothing } => {
                fit_drps(&calibration_items(&calib, smoothing), &fit.with_seed(fit_seed)).map(Some)
            }
            _ => Ok(None),
        })
        .collect()
}

/// Repeated random calibration/evaluation splits.
///
/// Calibrated methods are fitted on each split's calibration items only;
/// every method is scored on the complement. Split `k` draws its indices
/// from stream `("split", k)` of `split.seed` and fits with a seed derived
/// from `fit.seed` and `k`, so results are independent of method order and
/// thread scheduling.
pub fn run_splits(
    items: &[EvalItem],
    methods: &[MethodBinding],
    split: &SplitConfig,
    fit: &FitConfig,
) -> Result<SplitsOutcome> {
    if methods.is_empty() {
        return Err(Error::invalid("no methods to evaluate"));
    }
    split.calibration_size(items.len())?;
    let splits = (0..split.num_splits)
        .into_par_iter()
        .map(|k| {
            let (calibration, evaluation) = split.draw(items.len(), k)?;
            let fits = fit_methods(items, &calibration, methods, fit, derive_seed(fit.seed, "split-fit", k as u64))?;
            let predictions = methods
                .iter()
                .zip(&fits)
                .map(|(binding, fitted)| {
                    evaluation
                        .iter()
                        .map(|&i| binding.method.predict(&items[i], fitted.as_ref().map(|f| &f.params)))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SplitRun {
                calibration,
                evaluation,
                predictions,
                fits,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SplitsOutcome {
        method_ids: methods.iter().map(|m| m.id.clone()).collect(),
        truths: items.iter().map(|i| i.truth).collect(),
        splits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Verdict::{Minus, Plus, Tie};

    fn lp(predicted: Verdict, truth: Verdict) -> LabeledPrediction {
        LabeledPrediction {
            item_id: String::new(),
            predicted,
            truth,
        }
    }

    #[test]
    fn metric_examples() {
        let preds = [lp(Minus, Plus), lp(Plus, Plus)];
        assert_eq!(mae(&preds).unwrap(), 1.0);
        assert_eq!(pairwise_accuracy(&preds).unwrap(), 0.5);
        let correct = [lp(Tie, Tie), lp(Plus, Plus)];
        assert_eq!(mae(&correct).unwrap(), 0.0);
        assert_eq!(pairwise_accuracy(&correct).unwrap(), 1.0);
        assert_eq!(mae(&[lp(Tie, Plus), lp(Tie, Minus)]).unwrap(), 1.0);
        let four = [lp(Tie, Plus), lp(Tie, Tie), lp(Plus, Plus), lp(Minus, Tie)];
        assert_eq!(pairwise_accuracy(&four).unwrap(), 0.5);
        assert!(matches!(mae(&[]), Err(Error::EmptyInput)));
        assert!(matches!(pairwise_accuracy(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn bayes_mae_of_uniform() {
        let d = [TernaryDistribution::uniform()];
        assert!((bayes_mae(&d).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ci_is_196_standard_errors() {
        let (mean, half) = mean_ci95(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(mean, 2.5);
        // sd = sqrt(5/3), se = sd / 2
        assert!((half - 1.96 * (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(mean_ci95(&[0.7]), (0.7, 0.0));
    }

    #[test]
    fn split_sizes() {
        let cfg = SplitConfig::default();
        assert_eq!(cfg.calibration_size(1000).unwrap(), 50);
        assert!(matches!(cfg.calibration_size(5), Err(Error::InsufficientData(_))));
        let (cal, eval) = cfg.draw(1000, 3).unwrap();
        assert_eq!(cal.len(), 50);
        assert_eq!(eval.len(), 950);
        assert_eq!(cfg.draw(1000, 3).unwrap().0, cal);
        assert_ne!(cfg.draw(1000, 4).unwrap().0, cal);
    }

    #[test]
    fn median_needs_two_samples() {
        let mut item = EvalItem::from_counts("a", VoteCounts::new(1, 0, 1).unwrap(), Plus);
        assert!(Method::Median.predict(&item, None).is_err());
        item.samples = vec![Tie, Plus];
        assert_eq!(Method::Median.predict(&item, None).unwrap(), Plus);
        assert!(matches!(
            Method::CiSc.predict(&item, None),
            Err(Error::MissingConfidence(_))
        ));
    }

    proptest! {
        #[test]
        fn metrics_are_consistent(pairs in prop::collection::vec((0usize..3, 0usize..3), 1..60)) {
            let preds: Vec<_> = pairs.iter().map(|&(a, b)| lp(Verdict::ALL[a], Verdict::ALL[b])).collect();
            let m = mae(&preds).unwrap();
            let pa = pairwise_accuracy(&preds).unwrap();
            prop_assert!((0.0..=2.0).contains(&m));
            prop_assert_eq!(m == 0.0, pa == 1.0);
            let mut rev = preds.clone();
            rev.reverse();
            prop_assert_eq!(mae(&rev).unwrap(), m);
            prop_assert_eq!(pairwise_accuracy(&rev).unwrap(), pa);
        }
    }
}
