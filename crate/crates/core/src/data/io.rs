//! Line-delimited JSON readers and writers.
//!
//! Unknown fields are ignored on input. Labels travel as the integers
//! `-1`, `0`, `1`.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{group_by_item, ItemLabel, ItemVotes, Prediction, TruthRecord, VoteRecord};
use crate::btd::{TernaryDistribution, Verdict};
use crate::error::{Error, Result};

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Parses every non-blank line; `check` runs on each parsed value.
fn read_jsonl<T, F>(path: &Path, mut check: F) -> Result<Vec<T>>
where
    T: DeserializeOwned,
    F: FnMut(&T, usize) -> Result<()>,
{
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: T = serde_json::from_str(line).map_err(|e| parse_error(path, line_no, e.to_string()))?;
        check(&value, line_no)?;
        out.push(value);
    }
    Ok(out)
}

/// Reads `votes.jsonl`, grouped by item in order of first appearance.
pub fn read_votes(path: impl AsRef<Path>) -> Result<Vec<ItemVotes>> {
    let path = path.as_ref();
    let records: Vec<VoteRecord> = read_jsonl(path, |r: &VoteRecord, line| match r.confidence {
        Some(c) if !(0.0..=1.0).contains(&c) => {
            Err(parse_error(path, line, format!("confidence {c} outside [0, 1]")))
        }
        _ => Ok(()),
    })?;
    Ok(group_by_item(records))
}

/// Reads `labels.jsonl`. An item may carry several labels only from distinct raters.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<ItemLabel>> {
    let path = path.as_ref();
    let mut seen: HashSet<(String, Option<String>)> = HashSet::new();
    read_jsonl(path, |l: &ItemLabel, _| {
        if !seen.insert((l.item_id.clone(), l.rater_id.clone())) {
            return Err(Error::DuplicateLabel {
                item: l.item_id.clone(),
                rater: l.rater_id.clone(),
            });
        }
        Ok(())
    })
}

#[derive(Serialize, Deserialize)]
struct PredictionLine {
    item_id: String,
    label: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_minus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_tie: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_plus: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct TruthLine {
    item_id: String,
    p_minus: f64,
    p_tie: f64,
    p_plus: f64,
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>> {
    let path = path.as_ref();
    let lines: Vec<PredictionLine> = read_jsonl(path, |_, _| Ok(()))?;
    lines
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            let distribution = match (l.p_minus, l.p_tie, l.p_plus) {
                (Some(a), Some(b), Some(c)) => Some(
                    TernaryDistribution::new(a, b, c).map_err(|e| parse_error(path, i + 1, e.to_string()))?,
                ),
                (None, None, None) => None,
                _ => return Err(parse_error(path, i + 1, "probabilities must be given all or none")),
            };
            Ok(Prediction {
                item_id: l.item_id,
                label: l.label,
                distribution,
            })
        })
        .collect()
}

pub fn read_truth(path: impl AsRef<Path>) -> Result<Vec<TruthRecord>> {
    let path = path.as_ref();
    let lines: Vec<TruthLine> = read_jsonl(path, |_, _| Ok(()))?;
    lines
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            let distribution = TernaryDistribution::new(l.p_minus, l.p_tie, l.p_plus)
                .map_err(|e| parse_error(path, i + 1, e.to_string()))?;
            Ok(TruthRecord {
                item_id: l.item_id,
                distribution,
            })
        })
        .collect()
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp: PathBuf = path.with_file_name(tmp_name);
    {
        let mut file = fs::File::create(&tmp).map_err(io_error(&tmp))?;
        file.write_all(bytes).map_err(io_error(&tmp))?;
        file.sync_all().map_err(io_error(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_error(path))
}

pub fn write_jsonl<'a, T, I>(path: impl AsRef<Path>, values: I) -> Result<()>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let mut buf = Vec::new();
    for value in values {
        serde_json::to_writer(&mut buf, value).map_err(|e| Error::invalid(e.to_string()))?;
        buf.push(b'\n');
    }
    write_atomic(path, &buf)
}

pub fn write_votes(path: impl AsRef<Path>, records: &[VoteRecord]) -> Result<()> {
    write_jsonl(path, records)
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[ItemLabel]) -> Result<()> {
    write_jsonl(path, labels)
}

pub fn write_predictions(path: impl AsRef<Path>, predictions: &[Prediction]) -> Result<()> {
    let lines: Vec<PredictionLine> = predictions
        .iter()
        .map(|p| PredictionLine {
            item_id: p.item_id.clone(),
            label: p.label,
            p_minus: p.distribution.map(|d| d.p_minus()),
            p_tie: p.distribution.map(|d| d.p_tie()),
            p_plus: p.distribution.map(|d| d.p_plus()),
        })
        .collect();
    write_jsonl(path, &lines)
}

pub fn write_truth(path: impl AsRef<Path>, truth: &[TruthRecord]) -> Result<()> {
    let lines: Vec<TruthLine> = truth
        .iter()
        .map(|t| TruthLine {
            item_id: t.item_id.clone(),
            p_minus: t.distribution.p_minus(),
            p_tie: t.distribution.p_tie(),
            p_plus: t.distribution.p_plus(),
        })
        .collect();
    write_jsonl(path, &lines)
}
