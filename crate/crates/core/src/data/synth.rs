//! Synthetic judge votes whose gold labels follow the Davidson law exactly.
//!
//! Per item: judge probabilities `q` over `(-1, 0, +1)` come from a Dirichlet;
//! the first `ceil(n/2)` votes are cast in `AB` order and the rest in `BA`;
//! positional bias moves mass toward whichever response is shown first; the
//! gold label is drawn from the model at `theta_true` evaluated on the full
//! canonical tally. The model is therefore well specified on this data.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{canonicalize, ItemLabel, Order, TruthRecord, VoteRecord};
use crate::btd::{compute_features, davidson_probs, DavidsonParams, Smoothing, TernaryDistribution, Verdict, VoteCounts};
use crate::error::{Error, Result};
use crate::seed::{stream_rng, StreamRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub theta_true: DavidsonParams,
    pub num_items: usize,
    pub votes_per_item: u32,
    /// Dirichlet concentrations for `(-1, 0, +1)`.
    pub dirichlet_concentration: [f64; 3],
    /// Probability moved toward the first-shown response, in `[-1, 1]`.
    pub order_bias: f64,
    pub smoothing: Smoothing,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            theta_true: DavidsonParams {
                beta: 1.0,
                nu: 1.0,
                gamma: 1.0,
            },
            num_items: 1000,
            votes_per_item: 20,
            dirichlet_concentration: [2.0, 2.0, 2.0],
            order_bias: 0.0,
            smoothing: Smoothing::default(),
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_items == 0 {
            return Err(Error::invalid("num_items must be positive"));
        }
        if self.votes_per_item == 0 {
            return Err(Error::invalid("votes_per_item must be positive"));
        }
        if !self.dirichlet_concentration.iter().all(|c| c.is_finite() && *c > 0.0) {
            return Err(Error::invalid("Dirichlet concentrations must be positive"));
        }
        if !(-1.0..=1.0).contains(&self.order_bias) {
            return Err(Error::invalid("order_bias must lie in [-1, 1]"));
        }
        DavidsonParams::new(self.theta_true.beta, self.theta_true.nu, self.theta_true.gamma)?;
        Smoothing::new(self.smoothing.alpha, self.smoothing.kappa)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub records: Vec<VoteRecord>,
    pub labels: Vec<ItemLabel>,
    pub truth: Vec<TruthRecord>,
}

struct SyntheticItem {
    records: Vec<VoteRecord>,
    label: ItemLabel,
    truth: TruthRecord,
}

fn sample_dirichlet(rng: &mut StreamRng, concentration: &[f64; 3]) -> [f64; 3] {
    let mut draws = concentration.map(|a| Gamma::new(a, 1.0).expect("validated shape").sample(rng));
    let total: f64 = draws.iter().sum();
    if total > 0.0 {
        draws.iter_mut().for_each(|d| *d /= total);
        draws
    } else {
        [1.0 / 3.0; 3]
    }
}

/// Shifts `bias` from `-1` to `+1` (canonical orientation) under `AB`, and the
/// other way under `BA`.
fn apply_order_bias(q: [f64; 3], bias: f64, order: Order) -> [f64; 3] {
    let shift = match order {
        Order::AB => bias,
        Order::BA => -bias,
    };
    let mut p = [(q[0] - shift).clamp(0.0, 1.0), q[1], (q[2] + shift).clamp(0.0, 1.0)];
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

fn sample_label(rng: &mut StreamRng, p: &[f64; 3]) -> Verdict {
    let u: f64 = rng.random();
    if u < p[0] {
        Verdict::Minus
    } else if u < p[0] + p[1] {
        Verdict::Tie
    } else {
        Verdict::Plus
    }
}

fn generate_item(cfg: &GeneratorConfig, index: usize, width: usize) -> SyntheticItem {
    let mut rng = stream_rng(cfg.seed, "item", index as u64);
    let item_id = format!("item-{index:0width$}");
    let q = sample_dirichlet(&mut rng, &cfg.dirichlet_concentration);
    let n = cfg.votes_per_item;
    let first_order_votes = n.div_ceil(2);

    let records: Vec<VoteRecord> = (0..n)
        .map(|j| {
            let order = if j < first_order_votes { Order::AB } else { Order::BA };
            let p = apply_order_bias(q, cfg.order_bias, order);
            let canonical = sample_label(&mut rng, &p);
            let raw_label = match order {
                Order::AB => canonical,
                Order::BA => canonical.negate(),
            };
            VoteRecord {
                item_id: item_id.clone(),
                order,
                raw_label,
                confidence: Some(p[canonical.index()]),
                sample_index: j,
            }
        })
        .collect();

    let counts = VoteCounts::from_verdicts(records.iter().map(canonicalize)).expect("n >= 1");
    let distribution = davidson_probs(&compute_features(&counts, &cfg.smoothing), &cfg.theta_true);
    let truth = sample_label(&mut rng, &distribution.as_array());
    SyntheticItem {
        records,
        label: ItemLabel {
            item_id: item_id.clone(),
            truth,
            rater_id: None,
        },
        truth: TruthRecord { item_id, distribution },
    }
}

/// Generates votes, gold labels and true label distributions.
/// Bit-reproducible for a fixed config, independent of thread count.
pub fn generate_synthetic(cfg: &GeneratorConfig) -> Result<SyntheticData> {
    cfg.validate()?;
    let width = (cfg.num_items.saturating_sub(1)).to_string().len().max(6);
    let items: Vec<SyntheticItem> = (0..cfg.num_items)
        .into_par_iter()
        .map(|i| generate_item(cfg, i, width))
        .collect();

    let mut data = SyntheticData {
        records: Vec::with_capacity(cfg.num_items * cfg.votes_per_item as usize),
        labels: Vec::with_capacity(cfg.num_items),
        truth: Vec::with_capacity(cfg.num_items),
    };
    for item in items {
        data.records.extend(item.records);
        data.labels.push(item.label);
        data.truth.push(item.truth);
    }
    Ok(data)
}

impl SyntheticData {
    /// True distributions in item order.
    pub fn distributions(&self) -> Vec<TernaryDistribution> {
        self.truth.iter().map(|t| t.distribution).collect()
    }
}
