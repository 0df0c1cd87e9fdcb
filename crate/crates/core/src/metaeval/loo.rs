//! Leave-one-out comparison of the system against individual human raters.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::baselines::majority_vote;
use crate::btd::{Verdict, VoteCounts};
use crate::data::ItemLabel;
use crate::error::{Error, Result};

/// Items × raters; `None` where a rater skipped an item.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    pub items: Vec<String>,
    pub raters: Vec<String>,
    pub ratings: Vec<Vec<Option<Verdict>>>,
}

impl RatingMatrix {
    pub fn new(items: Vec<String>, raters: Vec<String>, ratings: Vec<Vec<Option<Verdict>>>) -> Result<Self> {
        if ratings.len() != items.len() {
            return Err(Error::LengthMismatch {
                left: items.len(),
                right: ratings.len(),
            });
        }
        if let Some(row) = ratings.iter().find(|r| r.len() != raters.len()) {
            return Err(Error::LengthMismatch {
                left: raters.len(),
                right: row.len(),
            });
        }
        Ok(RatingMatrix { items, raters, ratings })
    }

    /// Builds the matrix from labels that all carry a `rater_id`. Items and
    /// raters keep their order of first appearance.
    pub fn from_labels(labels: &[ItemLabel]) -> Result<Self> {
        let mut item_index: HashMap<&str, usize> = HashMap::new();
        let mut rater_index: HashMap<&str, usize> = HashMap::new();
        let mut items = Vec::new();
        let mut raters = Vec::new();
        let mut cells = Vec::with_capacity(labels.len());
        for label in labels {
            let rater = label
                .rater_id
                .as_deref()
                .ok_or_else(|| Error::invalid(format!("label for {:?} has no rater_id", label.item_id)))?;
            let i = *item_index.entry(&label.item_id).or_insert_with(|| {
                items.push(label.item_id.clone());
                items.len() - 1
            });
            let r = *rater_index.entry(rater).or_insert_with(|| {
                raters.push(rater.to_string());
                raters.len() - 1
            });
            cells.push((i, r, label.truth));
        }
        let mut ratings = vec![vec![None; raters.len()]; items.len()];
        for (i, r, v) in cells {
            ratings[i][r] = Some(v);
        }
        RatingMatrix::new(items, raters, ratings)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooRow {
    pub rater_id: String,
    pub human_pa: f64,
    pub system_pa: f64,
    pub win: bool,
    pub items_compared: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooReport {
    pub rows: Vec<LooRow>,
    pub wins: usize,
}

/// For each rater, majority-votes the remaining raters into a reference
/// label (ties toward 0) and compares the held-out rater and the system
/// against it on the items the held-out rater labeled.
pub fn leave_one_out(ratings: &RatingMatrix, system: &[Verdict]) -> Result<LooReport> {
    if ratings.raters.len() < 3 {
        return Err(Error::TooFewRaters(ratings.raters.len()));
    }
    if system.len() != ratings.items.len() {
        return Err(Error::LengthMismatch {
            left: ratings.items.len(),
            right: system.len(),
        });
    }
    let rows = (0..ratings.raters.len())
        .map(|held_out| {
            let mut compared = 0usize;
            let mut human_hits = 0usize;
            let mut system_hits = 0usize;
            for (row, predicted) in ratings.ratings.iter().zip(system) {
                let Some(own) = row[held_out] else { continue };
                let others = row
                    .iter()
                    .enumerate()
                    .filter(|(r, _)| *r != held_out)
                    .filter_map(|(_, v)| *v);
                let Ok(counts) = VoteCounts::from_verdicts(others) else { continue };
                let reference = majority_vote(&counts);
                compared += 1;
                human_hits += usize::from(own == reference);
                system_hits += usize::from(*predicted == reference);
            }
            if compared == 0 {
                return Err(Error::InsufficientData(format!(
                    "rater {:?} shares no items with the other raters",
                    ratings.raters[held_out]
                )));
            }
            let human_pa = human_hits as f64 / compared as f64;
            let system_pa = system_hits as f64 / compared as f64;
            Ok(LooRow {
                rater_id: ratings.raters[held_out].clone(),
                human_pa,
                system_pa,
                win: system_pa > human_pa,
                items_compared: compared,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let wins = rows.iter().filter(|r| r.win).count();
    Ok(LooReport { rows, wins })
}
