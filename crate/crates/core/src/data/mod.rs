//! Vote and label records, orientation handling and tallying.

mod io;
mod synth;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::baselines::{majority_vote, ConfidentVote};
use crate::btd::{TernaryDistribution, Verdict, VoteCounts};
use crate::error::{Error, Result};

pub use io::{
    read_labels, read_predictions, read_truth, read_votes, write_atomic, write_jsonl, write_labels,
    write_predictions, write_truth, write_votes,
};
pub use synth::{generate_synthetic, GeneratorConfig, SyntheticData};

/// Presentation order of the two responses: `AB` shows the first response
/// first, `BA` shows it second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Order {
    AB,
    BA,
}

impl Order {
    pub fn flipped(self) -> Order {
        match self {
            Order::AB => Order::BA,
            Order::BA => Order::AB,
        }
    }
}

/// One judge vote as sampled. `raw_label` refers to the pair in presented
/// order, so `+1` under `BA` favors the second response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteRecord {
    pub item_id: String,
    pub order: Order,
    #[serde(rename = "label")]
    pub raw_label: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    pub sample_index: u32,
}

/// The vote expressed in the canonical `(first, second)` orientation.
pub fn canonicalize(record: &VoteRecord) -> Verdict {
    match record.order {
        Order::AB => record.raw_label,
        Order::BA => record.raw_label.negate(),
    }
}

/// Counts canonical labels of records that all belong to one item.
pub fn tally(records: &[VoteRecord]) -> Result<VoteCounts> {
    let first = records.first().ok_or(Error::EmptyInput)?;
    if let Some(other) = records.iter().find(|r| r.item_id != first.item_id) {
        return Err(Error::MixedItems {
            first: first.item_id.clone(),
            other: other.item_id.clone(),
        });
    }
    VoteCounts::from_verdicts(records.iter().map(canonicalize))
}

/// All votes of one item, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemVotes {
    pub item_id: String,
    pub records: Vec<VoteRecord>,
}

impl ItemVotes {
    pub fn counts(&self) -> Result<VoteCounts> {
        tally(&self.records)
    }

    pub fn canonical_labels(&self) -> Vec<Verdict> {
        self.records.iter().map(canonicalize).collect()
    }

    /// Canonical labels with their confidences; every record must carry one.
    pub fn confident_votes(&self) -> Result<Vec<ConfidentVote>> {
        self.records
            .iter()
            .map(|r| {
                let c = r
                    .confidence
                    .ok_or_else(|| Error::MissingConfidence(self.item_id.clone()))?;
                ConfidentVote::new(canonicalize(r), c)
            })
            .collect()
    }

    /// Canonical labels cast under `order`, sorted by sample index.
    pub fn labels_for(&self, order: Order) -> Vec<Verdict> {
        let mut picked: Vec<&VoteRecord> = self.records.iter().filter(|r| r.order == order).collect();
        picked.sort_by_key(|r| r.sample_index);
        picked.into_iter().map(canonicalize).collect()
    }
}

/// Groups records by item, keeping items in order of first appearance.
pub fn group_by_item(records: Vec<VoteRecord>) -> Vec<ItemVotes> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut groups: Vec<ItemVotes> = Vec::new();
    for record in records {
        match index.get(&record.item_id) {
            Some(&i) => groups[i].records.push(record),
            None => {
                index.insert(record.item_id.clone(), groups.len());
                groups.push(ItemVotes {
                    item_id: record.item_id.clone(),
                    records: vec![record],
                });
            }
        }
    }
    groups
}

/// A gold (or single-rater) label for one item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemLabel {
    pub item_id: String,
    #[serde(rename = "label")]
    pub truth: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rater_id: Option<String>,
}

/// One gold label per item: single labels pass through, several raters are
/// combined by majority vote (ties toward 0).
pub fn consensus_labels(labels: &[ItemLabel]) -> Result<BTreeMap<String, Verdict>> {
    let mut grouped: BTreeMap<&str, Vec<Verdict>> = BTreeMap::new();
    for label in labels {
        grouped.entry(&label.item_id).or_default().push(label.truth);
    }
    grouped
        .into_iter()
        .map(|(id, votes)| Ok((id.to_string(), majority_vote(&VoteCounts::from_verdicts(votes)?))))
        .collect()
}

/// An aggregated decision, with the model's distribution when there is one.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub item_id: String,
    pub label: Verdict,
    pub distribution: Option<TernaryDistribution>,
}

/// The generator's true label distribution for one item.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRecord {
    pub item_id: String,
    pub distribution: TernaryDistribution,
}
