//! The collection loop: gated query execution per snapshot event with a
//! per-epoch content cache, a per-value throttle and periodic heartbeats.

mod replay;

pub use replay::{
    parse_event_stream, replay, write_event_stream, CollectorErrorReport, Gap, MemorySink, NdjsonSink, ReplayOptions,
    ReplaySummary, Sink, SnapshotEvent,
};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{execute, extract};
use crate::query::{GraphQuery, QueryAst};
use crate::relations::{augment, UiGraph};
use crate::snapshot::{NodeId, UiSnapshot};

pub const COLLECTOR_SCHEMA: &str = "uiq-collector/1";
pub const CACHE_CLEAR_MS: i64 = 10_000;
pub const THROTTLE_MS: i64 = 4_000;
pub const HEARTBEAT_MS: i64 = 600_000;

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("invalid collector spec: {0}")]
    InvalidSpec(String),
    #[error("events out of order at index {index}: {timestamp} follows {previous}")]
    Unsorted { index: usize, previous: i64, timestamp: i64 },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A collection campaign: which app, when, and what to extract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CollectorSpec {
    pub collector_id: String,
    pub package_name: String,
    pub start_time: i64,
    pub end_time: i64,
    pub queries: Vec<String>,
    #[serde(default)]
    pub description: String,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CollectorDoc {
    schema: String,
    collector_id: String,
    package_name: String,
    start_time: i64,
    end_time: i64,
    queries: Vec<String>,
    #[serde(default)]
    description: String,
}

impl CollectorSpec {
    /// Parses every query, checking each is scoped to `packageName`.
    pub fn compile(&self) -> Result<Vec<GraphQuery>, RuntimeError> {
        if self.start_time >= self.end_time {
            return Err(RuntimeError::InvalidSpec(format!(
                "startTime {} must be before endTime {}",
                self.start_time, self.end_time
            )));
        }
        if self.queries.is_empty() {
            return Err(RuntimeError::InvalidSpec("queries must not be empty".into()));
        }
        self.queries
            .iter()
            .enumerate()
            .map(|(i, text)| {
                let q = GraphQuery::parse(text).map_err(|e| RuntimeError::InvalidSpec(format!("query {i}: {e}")))?;
                if q.source_package.as_deref() != Some(self.package_name.as_str()) {
                    return Err(RuntimeError::InvalidSpec(format!(
                        "query {i} is scoped to {:?}, expected \"{}\"",
                        q.source_package, self.package_name
                    )));
                }
                Ok(q)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), RuntimeError> {
        self.compile().map(|_| ())
    }

    pub fn from_json(text: &str) -> Result<Self, RuntimeError> {
        let doc: CollectorDoc = serde_json::from_str(text)
            .map_err(|e| RuntimeError::Format { line: e.line(), message: e.to_string() })?;
        if doc.schema != COLLECTOR_SCHEMA {
            return Err(RuntimeError::InvalidSpec(format!("schema must be \"{COLLECTOR_SCHEMA}\", found \"{}\"", doc.schema)));
        }
        let spec = CollectorSpec {
            collector_id: doc.collector_id,
            package_name: doc.package_name,
            start_time: doc.start_time,
            end_time: doc.end_time,
            queries: doc.queries,
            description: doc.description,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        let doc = CollectorDoc {
            schema: COLLECTOR_SCHEMA.into(),
            collector_id: self.collector_id.clone(),
            package_name: self.package_name.clone(),
            start_time: self.start_time,
            end_time: self.end_time,
            queries: self.queries.clone(),
            description: self.description.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("spec serializes")
    }
}

/// One extracted datum. Field order is the NDJSON column order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CollectionRecord {
    pub collector_id: String,
    pub timestamp: i64,
    pub snapshot_id: String,
    pub node_id: NodeId,
    pub query_index: usize,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HeartbeatEvent {
    pub collector_id: String,
    pub timestamp: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DedupMode {
    #[default]
    Enabled,
    /// Every extracted value is recorded. Test baseline only.
    Disabled,
}

/// What one event did to a collector.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepOutcome {
    pub executed: bool,
    pub records: Vec<CollectionRecord>,
    pub suppressed: usize,
    /// Set on the step where the collector failed; later steps stay silent.
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CollectorState {
    pub spec: CollectorSpec,
    queries: Vec<QueryAst>,
    pub recent_values: BTreeSet<String>,
    pub last_save_time_by_value: BTreeMap<String, i64>,
    pub last_cache_clear: i64,
    pub last_heartbeat: i64,
    pub dedup: DedupMode,
    pub errored: Option<String>,
    last_event: Option<i64>,
}

impl CollectorState {
    /// Clocks start at `spec.startTime`.
    pub fn new(spec: CollectorSpec) -> Result<Self, RuntimeError> {
        let queries = spec.compile()?.into_iter().map(|q| q.root).collect();
        Ok(CollectorState {
            last_cache_clear: spec.start_time,
            last_heartbeat: spec.start_time,
            spec,
            queries,
            recent_values: BTreeSet::new(),
            last_save_time_by_value: BTreeMap::new(),
            dedup: DedupMode::Enabled,
            errored: None,
            last_event: None,
        })
    }

    pub fn with_dedup(mut self, dedup: DedupMode) -> Self {
        self.dedup = dedup;
        self
    }

    pub fn is_active(&self, foreground_package: &str, now: i64) -> bool {
        self.errored.is_none()
            && foreground_package == self.spec.package_name
            && (self.spec.start_time..=self.spec.end_time).contains(&now)
    }

    /// Feeds one snapshot event. Augments the snapshot only when the gates pass.
    pub fn step(&mut self, snapshot: &UiSnapshot, foreground_package: &str, now: i64) -> StepOutcome {
        if !self.is_active(foreground_package, now) {
            self.observe(now);
            return StepOutcome::default();
        }
        let graph = augment(snapshot.clone());
        self.step_graph(&graph, foreground_package, now)
    }

    /// [`step`](Self::step) against an already-augmented snapshot.
    pub fn step_graph(&mut self, graph: &UiGraph, foreground_package: &str, now: i64) -> StepOutcome {
        if let Some(prev) = self.last_event {
            debug_assert!(now >= prev, "event stream must be monotone");
        }
        self.observe(now);
        let mut out = StepOutcome::default();
        if !self.is_active(foreground_package, now) {
            return out;
        }
        if now - self.last_cache_clear >= CACHE_CLEAR_MS {
            self.recent_values.clear();
            self.last_cache_clear = now;
        }
        out.executed = true;

        let mut matched = Vec::new();
        for (index, query) in self.queries.iter().enumerate() {
            match execute(query, graph) {
                Ok(m) => matched.extend(m.node_ids.into_iter().map(|n| (index, n))),
                Err(e) => {
                    let msg = format!("query {index}: {e}");
                    self.errored = Some(msg.clone());
                    out.error = Some(msg);
                    return out;
                }
            }
        }

        for (query_index, node) in matched {
            let Ok(x) = extract(node, graph) else { continue };
            if !x.has_content {
                continue;
            }
            if self.dedup == DedupMode::Enabled && self.suppressed(&x.value, now) {
                out.suppressed += 1;
                continue;
            }
            self.recent_values.insert(x.value.clone());
            self.last_save_time_by_value.insert(x.value.clone(), now);
            out.records.push(CollectionRecord {
                collector_id: self.spec.collector_id.clone(),
                timestamp: now,
                snapshot_id: graph.snapshot().snapshot_id.clone(),
                node_id: node,
                query_index,
                value: x.value,
            });
        }
        out
    }

    fn suppressed(&self, value: &str, now: i64) -> bool {
        self.recent_values.contains(value)
            || self.last_save_time_by_value.get(value).is_some_and(|&t| now - t < THROTTLE_MS)
    }

    fn observe(&mut self, now: i64) {
        self.last_event = Some(self.last_event.map_or(now, |p| p.max(now)));
    }

    /// Emits when at least ten minutes have passed since the last heartbeat.
    pub fn heartbeat(&mut self, now: i64) -> Option<HeartbeatEvent> {
        if now - self.last_heartbeat >= HEARTBEAT_MS {
            self.last_heartbeat = now;
            Some(HeartbeatEvent { collector_id: self.spec.collector_id.clone(), timestamp: now })
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const IG_QUERY: &str = r#"(conj (hasPackageName "com.instagram.android") (hasClassName "android.widget.TextView") (above (conj (hasText "Sponsored") (hasClassName "android.widget.Button"))))"#;

    fn spec() -> CollectorSpec {
        CollectorSpec {
            collector_id: "ads".into(),
            package_name: fixtures::INSTAGRAM.into(),
            start_time: 0,
            end_time: 100_000_000,
            queries: vec![IG_QUERY.into()],
            description: "advertisers".into(),
        }
    }

    fn nike() -> UiSnapshot {
        fixtures::shifted_variant("s", 0, "nike", 0, 0)
    }

    fn run(times: &[i64]) -> usize {
        let mut st = CollectorState::new(spec()).unwrap();
        times.iter().map(|&t| st.step(&nike(), fixtures::INSTAGRAM, t).records.len()).sum()
    }

    #[test]
    fn throttle_suppresses_repeat_within_four_seconds() {
        assert_eq!(run(&[0, 2_000]), 1);
    }

    #[test]
    fn cache_clear_allows_repeat() {
        assert_eq!(run(&[0, 10_000, 11_000]), 2);
        assert_eq!(run(&[0, 11_000]), 2);
        assert_eq!(run(&[0, 9_999]), 1);
    }

    #[test]
    fn package_gate() {
        let mut st = CollectorState::new(spec()).unwrap();
        let out = st.step(&nike(), "com.android.chrome", 0);
        assert!(!out.executed);
        assert!(out.records.is_empty());
    }

    #[test]
    fn time_window_gate() {
        let mut s = spec();
        s.start_time = 5_000;
        s.end_time = 6_000;
        let mut st = CollectorState::new(s).unwrap();
        assert!(st.step(&nike(), fixtures::INSTAGRAM, 4_999).records.is_empty());
        assert_eq!(st.step(&nike(), fixtures::INSTAGRAM, 6_000).records.len(), 1);
        assert!(!st.step(&nike(), fixtures::INSTAGRAM, 6_001).executed);
    }

    #[test]
    fn record_fields() {
        let mut st = CollectorState::new(spec()).unwrap();
        let rec = st.step(&nike(), fixtures::INSTAGRAM, 42).records.remove(0);
        assert_eq!(
            serde_json::to_string(&rec).unwrap(),
            r#"{"collectorId":"ads","timestamp":42,"snapshotId":"s","nodeId":1,"queryIndex":0,"value":"nike"}"#
        );
    }

    #[test]
    fn execution_error_surfaces_once() {
        let mut s = spec();
        s.queries = vec![r#"(conj (hasPackageName "com.instagram.android") (prev (hasText "x")))"#.into()];
        let mut st = CollectorState::new(s).unwrap();
        let first = st.step(&nike(), fixtures::INSTAGRAM, 0);
        assert!(first.error.is_some());
        assert!(first.records.is_empty());
        let second = st.step(&nike(), fixtures::INSTAGRAM, 1);
        assert!(second.error.is_none() && !second.executed);
    }

    #[test]
    fn heartbeat_boundary() {
        let mut st = CollectorState::new(spec()).unwrap();
        assert!(st.heartbeat(599_999).is_none());
        assert!(st.heartbeat(600_000).is_some());
        assert!(st.heartbeat(600_001).is_none());
    }

    #[test]
    fn heartbeats_over_three_days() {
        let mut s = spec();
        s.end_time = 72 * 3_600_000;
        let mut st = CollectorState::new(s).unwrap();
        let n = (0..=72 * 60).filter_map(|m| st.heartbeat(m * 60_000)).count();
        assert_eq!(n, 432);
    }

    #[test]
    fn spec_validation() {
        let mut s = spec();
        s.end_time = 0;
        assert!(s.validate().is_err());
        let mut s = spec();
        s.queries.clear();
        assert!(s.validate().is_err());
        let mut s = spec();
        s.queries = vec![r#"(hasText "x")"#.into()];
        assert!(s.validate().is_err());
        let mut s = spec();
        s.package_name = "com.ubercab".into();
        assert!(s.validate().is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let s = spec();
        let text = s.to_json();
        assert!(text.contains(COLLECTOR_SCHEMA));
        assert_eq!(CollectorSpec::from_json(&text).unwrap(), s);
        assert!(CollectorSpec::from_json(&text.replace("uiq-collector/1", "v0")).is_err());
    }

    #[test]
    fn dedup_disabled_records_everything() {
        let mut st = CollectorState::new(spec()).unwrap().with_dedup(DedupMode::Disabled);
        let n: usize = [0, 1, 2].iter().map(|&t| st.step(&nike(), fixtures::INSTAGRAM, t).records.len()).sum();
        assert_eq!(n, 3);
    }
}
