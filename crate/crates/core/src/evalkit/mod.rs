//! Ground-truth matching, precision/recall/F1, and a seeded synthetic corpus.

mod corpus;

pub use corpus::{generate_corpus, Corpus, CorpusParams, ADVERTISER_QUERY};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::runtime::{CollectionRecord, CollectorSpec, RuntimeError};

pub const DEFAULT_WINDOW_MS: i64 = 5_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GroundTruthLabel {
    pub timestamp: i64,
    pub expected_value: String,
    pub app_package: String,
}

/// A collected value tagged with the app it came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Observation {
    pub timestamp: i64,
    pub value: String,
    pub app_package: String,
}

/// Tags records with their collector's package. Records from unknown collectors are dropped.
pub fn observations(records: &[CollectionRecord], specs: &[CollectorSpec]) -> Vec<Observation> {
    let pkg: BTreeMap<&str, &str> =
        specs.iter().map(|s| (s.collector_id.as_str(), s.package_name.as_str())).collect();
    records
        .iter()
        .filter_map(|r| {
            pkg.get(r.collector_id.as_str()).map(|p| Observation {
                timestamp: r.timestamp,
                value: r.value.clone(),
                app_package: p.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Metrics {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// A ratio had a zero denominator and was defined as 0.
    pub empty: bool,
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        Metrics {
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            precision,
            recall,
            f1: compute_f1(precision, recall),
            empty: tp + fp == 0 || tp + fn_ == 0,
        }
    }
}

pub fn compute_f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// A ratio as a percentage rounded to one decimal.
pub fn percent(ratio: f64) -> f64 {
    (ratio * 1000.0).round() / 10.0
}

/// Greedy one-to-one matching. Records are taken in `(timestamp, value)`
/// order; each claims the earliest unmatched label with the same value and
/// package within `window_ms`.
pub fn match_records(records: &[Observation], labels: &[GroundTruthLabel], window_ms: i64) -> Metrics {
    let mut recs: Vec<&Observation> = records.iter().collect();
    recs.sort();
    let mut labs: Vec<&GroundTruthLabel> = labels.iter().collect();
    labs.sort();
    let mut used = vec![false; labs.len()];
    let mut tp = 0;
    for r in recs {
        let hit = labs.iter().enumerate().position(|(i, l)| {
            !used[i]
                && l.expected_value == r.value
                && l.app_package == r.app_package
                && (l.timestamp - r.timestamp).abs() <= window_ms
        });
        if let Some(i) = hit {
            used[i] = true;
            tp += 1;
        }
    }
    Metrics::from_counts(tp, records.len() - tp, labels.len() - tp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsBlock {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub empty: bool,
}

impl From<Metrics> for MetricsBlock {
    fn from(m: Metrics) -> Self {
        MetricsBlock {
            true_positives: m.true_positives,
            false_positives: m.false_positives,
            false_negatives: m.false_negatives,
            precision: percent(m.precision),
            recall: percent(m.recall),
            f1: percent(m.f1),
            empty: m.empty,
        }
    }
}

/// Percentages with one decimal, overall and per app package.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricsReport {
    pub window_ms: i64,
    pub overall: MetricsBlock,
    pub per_package: BTreeMap<String, MetricsBlock>,
}

pub fn evaluate(records: &[Observation], labels: &[GroundTruthLabel], window_ms: i64) -> MetricsReport {
    let mut packages: Vec<&str> = records
        .iter()
        .map(|r| r.app_package.as_str())
        .chain(labels.iter().map(|l| l.app_package.as_str()))
        .collect();
    packages.sort();
    packages.dedup();
    let per_package = packages
        .into_iter()
        .map(|p| {
            let rs: Vec<_> = records.iter().filter(|r| r.app_package == p).cloned().collect();
            let ls: Vec<_> = labels.iter().filter(|l| l.app_package == p).cloned().collect();
            (p.to_string(), match_records(&rs, &ls, window_ms).into())
        })
        .collect();
    MetricsReport { window_ms, overall: match_records(records, labels, window_ms).into(), per_package }
}

pub fn parse_labels(text: &str) -> Result<Vec<GroundTruthLabel>, RuntimeError> {
    let mut out: Vec<GroundTruthLabel> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let l: GroundTruthLabel =
            serde_json::from_str(line).map_err(|e| RuntimeError::Format { line: i + 1, message: e.to_string() })?;
        if out.last().is_some_and(|p| p.timestamp > l.timestamp) {
            return Err(RuntimeError::Format { line: i + 1, message: "label timestamps must not decrease".into() });
        }
        out.push(l);
    }
    Ok(out)
}

pub fn write_labels(labels: &[GroundTruthLabel]) -> String {
    labels.iter().map(|l| serde_json::to_string(l).expect("label serializes") + "\n").collect()
}

pub fn parse_records(text: &str) -> Result<Vec<CollectionRecord>, RuntimeError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| RuntimeError::Format { line: i + 1, message: e.to_string() }))
        .collect()
}
