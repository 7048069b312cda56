use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CollectionRecord, CollectorSpec, CollectorState, DedupMode, RuntimeError, HEARTBEAT_MS};
use crate::relations::augment;
use crate::snapshot::{snapshot_from_value, snapshot_to_value, UiSnapshot};

/// One line of an event stream file.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotEvent {
    pub timestamp: i64,
    pub foreground_package: String,
    pub snapshot: UiSnapshot,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct EventLine {
    timestamp: i64,
    foreground_package: String,
    snapshot: serde_json::Value,
}

pub fn parse_event_stream(text: &str) -> Result<Vec<SnapshotEvent>, RuntimeError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fail = |message: String| RuntimeError::Format { line: i + 1, message };
        let ev: EventLine = serde_json::from_str(line).map_err(|e| fail(e.to_string()))?;
        let snapshot = snapshot_from_value(ev.snapshot).map_err(|e| fail(e.to_string()))?;
        out.push(SnapshotEvent { timestamp: ev.timestamp, foreground_package: ev.foreground_package, snapshot });
    }
    Ok(out)
}

pub fn write_event_stream(events: &[SnapshotEvent]) -> String {
    let mut out = String::new();
    for ev in events {
        let line = EventLine {
            timestamp: ev.timestamp,
            foreground_package: ev.foreground_package.clone(),
            snapshot: snapshot_to_value(&ev.snapshot),
        };
        out.push_str(&serde_json::to_string(&line).expect("event serializes"));
        out.push('\n');
    }
    out
}

/// Destination for collected records.
pub trait Sink {
    fn append(&mut self, record: &CollectionRecord) -> std::io::Result<()>;

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

/// One JSON record per line.
pub struct NdjsonSink<W: Write> {
    out: W,
}

impl<W: Write> NdjsonSink<W> {
    pub fn new(out: W) -> Self {
        NdjsonSink { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl NdjsonSink<BufWriter<File>> {
    /// Opens `path` for appending, creating it if needed.
    pub fn append_to(path: &Path) -> std::io::Result<Self> {
        let f = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(NdjsonSink::new(BufWriter::new(f)))
    }
}

impl<W: Write> Sink for NdjsonSink<W> {
    fn append(&mut self, record: &CollectionRecord) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}

#[derive(Debug, Default, Clone)]
pub struct MemorySink {
    pub records: Vec<CollectionRecord>,
}

impl Sink for MemorySink {
    fn append(&mut self, record: &CollectionRecord) -> std::io::Result<()> {
        self.records.push(record.clone());
        Ok(())
    }
}

/// A period `[start, end)` during which the collector process was not running.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub start: i64,
    pub end: i64,
}

impl Gap {
    pub fn contains(&self, t: i64) -> bool {
        self.start <= t && t < self.end
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReplayOptions {
    pub dedup: DedupMode,
    pub gaps: Vec<Gap>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CollectorErrorReport {
    pub collector_id: String,
    pub timestamp: i64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReplaySummary {
    pub events: usize,
    pub events_in_gaps: usize,
    pub records: usize,
    pub suppressed: usize,
    pub per_collector: BTreeMap<String, usize>,
    pub heartbeats: BTreeMap<String, usize>,
    pub errors: Vec<CollectorErrorReport>,
}

/// Runs every collector over the event stream in order, writing records to `sink`.
///
/// Heartbeats tick on a simulated clock between events; ticks that fall in a
/// gap are lost and the clock restarts when the gap ends.
pub fn replay(
    specs: &[CollectorSpec],
    events: &[SnapshotEvent],
    options: &ReplayOptions,
    sink: &mut dyn Sink,
) -> Result<ReplaySummary, RuntimeError> {
    for (index, pair) in events.windows(2).enumerate() {
        if pair[1].timestamp < pair[0].timestamp {
            return Err(RuntimeError::Unsorted { index: index + 1, previous: pair[0].timestamp, timestamp: pair[1].timestamp });
        }
    }
    let mut states = specs
        .iter()
        .map(|s| CollectorState::new(s.clone()).map(|st| st.with_dedup(options.dedup)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut summary = ReplaySummary { events: events.len(), ..Default::default() };
    for st in &states {
        summary.per_collector.insert(st.spec.collector_id.clone(), 0);
        summary.heartbeats.insert(st.spec.collector_id.clone(), 0);
    }

    for ev in events {
        for st in states.iter_mut() {
            let n = tick_heartbeats(st, ev.timestamp, &options.gaps);
            *summary.heartbeats.get_mut(&st.spec.collector_id).unwrap() += n;
        }
        if options.gaps.iter().any(|g| g.contains(ev.timestamp)) {
            summary.events_in_gaps += 1;
            continue;
        }
        if !states.iter().any(|st| st.is_active(&ev.foreground_package, ev.timestamp)) {
            continue;
        }
        let graph = augment(ev.snapshot.clone());
        for st in states.iter_mut() {
            let out = st.step_graph(&graph, &ev.foreground_package, ev.timestamp);
            if let Some(message) = out.error {
                summary.errors.push(CollectorErrorReport {
                    collector_id: st.spec.collector_id.clone(),
                    timestamp: ev.timestamp,
                    message,
                });
            }
            summary.suppressed += out.suppressed;
            for rec in &out.records {
                sink.append(rec)?;
            }
            summary.records += out.records.len();
            *summary.per_collector.get_mut(&st.spec.collector_id).unwrap() += out.records.len();
        }
    }
    sink.flush()?;
    Ok(summary)
}

fn tick_heartbeats(st: &mut CollectorState, until: i64, gaps: &[Gap]) -> usize {
    let mut n = 0;
    let end = until.min(st.spec.end_time);
    loop {
        let tick = st.last_heartbeat + HEARTBEAT_MS;
        if tick > end {
            return n;
        }
        match gaps.iter().find(|g| g.contains(tick)) {
            Some(g) => st.last_heartbeat = g.end,
            None => {
                if st.heartbeat(tick).is_some() {
                    n += 1;
                }
            }
        }
    }
}
