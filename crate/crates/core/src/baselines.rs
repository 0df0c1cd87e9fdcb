//! Aggregators that need no calibration: majority vote (SC), Soft-SC,
//! confidence-weighted vote (CI-SC) and the two-sample rounded median.
//!
//! All of them break ties symmetrically, so negating every input label
//! negates the output.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::btd::{Verdict, VoteCounts};
use crate::error::{Error, Result};

/// A sampled label with its sequence confidence in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidentVote {
    pub label: Verdict,
    confidence: f64,
}

impl ConfidentVote {
    pub fn new(label: Verdict, confidence: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::invalid(format!(
                "confidence must lie in [0, 1], got {confidence}"
            )));
        }
        Ok(ConfidentVote { label, confidence })
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }
}

/// How Soft-SC collapses the confidences inside one label group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SoftReducer {
    #[serde(rename = "min")]
    Minimum,
    #[default]
    Mean,
    Product,
}

impl SoftReducer {
    fn reduce(self, values: &[f64]) -> f64 {
        match self {
            SoftReducer::Minimum => values.iter().copied().fold(f64::INFINITY, f64::min),
            SoftReducer::Mean => values.iter().sum::<f64>() / values.len() as f64,
            SoftReducer::Product => values.iter().product(),
        }
    }
}

impl FromStr for SoftReducer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" | "minimum" => Ok(SoftReducer::Minimum),
            "mean" => Ok(SoftReducer::Mean),
            "product" | "prod" => Ok(SoftReducer::Product),
            other => Err(Error::invalid(format!("unknown reducer {other:?}"))),
        }
    }
}

impl fmt::Display for SoftReducer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SoftReducer::Minimum => "min",
            SoftReducer::Mean => "mean",
            SoftReducer::Product => "product",
        })
    }
}

/// Argmax over `[score(-1), score(0), score(+1)]`.
///
/// `0` wins whenever it is among the maximizers; a `+1`/`-1` deadlock also
/// resolves to `0`.
fn argmax_toward_tie(scores: [f64; 3]) -> Verdict {
    let [minus, tie, plus] = scores;
    let best = minus.max(tie).max(plus);
    if tie == best || minus == plus {
        Verdict::Tie
    } else if plus == best {
        Verdict::Plus
    } else {
        Verdict::Minus
    }
}

/// Relative slack under which two confidence scores count as equal.
const SCORE_TIE_TOLERANCE: f64 = 1e-12;

/// Picks the best-scoring label; labels whose scores tie are separated by
/// their vote counts, then by the majority-vote rule.
fn argmax_by_score_then_count(scores: [f64; 3], votes: &[ConfidentVote]) -> Verdict {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = SCORE_TIE_TOLERANCE * best.abs().max(1.0);
    let mut counts = [f64::NEG_INFINITY; 3];
    for (i, score) in scores.iter().enumerate() {
        if *score >= best - slack {
            counts[i] = votes.iter().filter(|v| v.label.index() == i).count() as f64;
        }
    }
    argmax_toward_tie(counts)
}

/// Self-consistency: the most frequent label.
pub fn majority_vote(counts: &VoteCounts) -> Verdict {
    argmax_toward_tie([
        f64::from(counts.minus()),
        f64::from(counts.tie()),
        f64::from(counts.plus()),
    ])
}

/// Soft self-consistency: reduce confidences per label group and take the
/// best group. Labels nobody voted for score negative infinity; equal scores
/// fall back to the vote counts.
pub fn soft_sc(votes: &[ConfidentVote], reducer: SoftReducer) -> Result<Verdict> {
    if votes.is_empty() {
        return Err(Error::EmptyInput);
    }
    let scores = Verdict::ALL.map(|label| {
        let group: Vec<f64> = votes
            .iter()
            .filter(|v| v.label == label)
            .map(|v| v.confidence)
            .collect();
        if group.is_empty() {
            f64::NEG_INFINITY
        } else {
            reducer.reduce(&group)
        }
    });
    Ok(argmax_by_score_then_count(scores, votes))
}

/// Confidence-informed self-consistency: confidence-weighted majority vote.
pub fn ci_sc(votes: &[ConfidentVote]) -> Result<Verdict> {
    if votes.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sums = [0.0; 3];
    for vote in votes {
        sums[vote.label.index()] += vote.confidence;
    }
    Ok(argmax_by_score_then_count(sums, votes))
}

/// Median of two labels, with a half-way result rounded away from zero.
pub fn rounded_median(a: Verdict, b: Verdict) -> Verdict {
    match a.value() + b.value() {
        s if s > 0 => Verdict::Plus,
        s if s < 0 => Verdict::Minus,
        _ => Verdict::Tie,
    }
}
