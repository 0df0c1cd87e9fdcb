use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceConfig {
    pub resamples_per_split: usize,
    pub tau: f64,
    pub seed: u64,
}

impl Default for SignificanceConfig {
    fn default() -> Self {
        SignificanceConfig {
            resamples_per_split: 100,
            tau: 0.05,
            seed: 0,
        }
    }
}

impl SignificanceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resamples_per_split == 0 {
            return Err(Error::invalid("resamples_per_split must be positive"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::invalid("tau must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Mean of `diffs` with each entry's sign flipped by one random bit.
fn flipped_mean(diffs: &[f64], rng: &mut impl RngCore) -> f64 {
    let mut total = 0.0;
    let mut bits = 0u64;
    for (i, d) in diffs.iter().enumerate() {
        if i % 64 == 0 {
            bits = rng.next_u64();
        }
        total += if bits & 1 == 1 { -d } else { *d };
        bits >>= 1;
    }
    total / diffs.len() as f64
}

/// Two-sided sign-flip test over several splits at once.
///
/// Each split contributes its paired per-item losses. The observed statistic
/// is the mean over splits of the per-split mean difference; the null
/// distribution pools every per-split resampled mean difference. Resamples
/// of split `k` come from stream `("resample", k)`, so `p(a, b) == p(b, a)`.
/// Returns `(1 + #{|null| >= |observed|}) / (1 + #null)`.
pub fn pooled_permutation_test(splits: &[(Vec<f64>, Vec<f64>)], cfg: &SignificanceConfig) -> Result<f64> {
    cfg.validate()?;
    if splits.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut observed = 0.0;
    let mut null = Vec::with_capacity(splits.len() * cfg.resamples_per_split);
    for (k, (a, b)) in splits.iter().enumerate() {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        if a.is_empty() {
            return Err(Error::EmptyInput);
        }
        let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        observed += diffs.iter().sum::<f64>() / diffs.len() as f64;
        let mut rng = stream_rng(cfg.seed, "resample", k as u64);
        null.extend((0..cfg.resamples_per_split).map(|_| flipped_mean(&diffs, &mut rng)));
    }
    let observed = (observed / splits.len() as f64).abs();
    // Sums of the same magnitudes in a different sign pattern can differ in
    // the last ulp; count those as ties.
    let threshold = observed - 1e-12 * observed.max(1.0);
    let extreme = null.iter().filter(|s| s.abs() >= threshold).count();
    Ok((1 + extreme) as f64 / (1 + null.len()) as f64)
}

/// Two-sided paired sign-flip test on one set of aligned per-item losses.
pub fn paired_permutation_test(losses_a: &[f64], losses_b: &[f64], cfg: &SignificanceConfig) -> Result<f64> {
    if losses_a.len() != losses_b.len() {
        return Err(Error::LengthMismatch {
            left: losses_a.len(),
            right: losses_b.len(),
        });
    }
    pooled_permutation_test(&[(losses_a.to_vec(), losses_b.to_vec())], cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoreDirection {
    LowerIsBetter,
    HigherIsBetter,
}

/// Greedy significance clustering.
///
/// Methods are sorted by mean score (best first, stable on ties). A method
/// joins the current cluster while it is not significantly different
/// (`p >= tau`) from every member; the first violation opens the next rank.
/// Returns the rank of each method in input order.
pub fn rank_clusters(means: &[f64], p_values: &[Vec<f64>], tau: f64, direction: ScoreDirection) -> Vec<usize> {
    let mut order: Vec<usize> = (0..means.len()).collect();
    order.sort_by(|&a, &b| match direction {
        ScoreDirection::LowerIsBetter => means[a].total_cmp(&means[b]),
        ScoreDirection::HigherIsBetter => means[b].total_cmp(&means[a]),
    });
    let mut ranks = vec![0; means.len()];
    let mut rank = 1;
    let mut cluster: Vec<usize> = Vec::new();
    for m in order {
        if cluster.iter().any(|&c| p_values[m][c] < tau) {
            rank += 1;
            cluster.clear();
        }
        cluster.push(m);
        ranks[m] = rank;
    }
    ranks
}

/// Ids of the methods sharing rank 1.
pub fn top_cluster(
    method_means: &[(String, f64)],
    p_values: &[Vec<f64>],
    tau: f64,
    direction: ScoreDirection,
) -> Vec<String> {
    let means: Vec<f64> = method_means.iter().map(|(_, m)| *m).collect();
    let ranks = rank_clusters(&means, p_values, tau, direction);
    method_means
        .iter()
        .zip(ranks)
        .filter(|(_, r)| *r == 1)
        .map(|((id, _), _)| id.clone())
        .collect()
}
