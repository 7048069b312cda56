//! Replay a synthetic event stream through a collector with and without
//! deduplication.

use uiq::evalkit::{generate_corpus, CorpusParams};
use uiq::runtime::{replay, DedupMode, Gap, MemorySink, ReplayOptions};

fn main() {
    let params = CorpusParams { events: 60, max_targets: 2, repeat_rate: 0.5, ..Default::default() };
    let corpus = generate_corpus(7, &params);
    let specs = std::slice::from_ref(&corpus.spec);
    for dedup in [DedupMode::Disabled, DedupMode::Enabled] {
        let mut sink = MemorySink::default();
        let s = replay(specs, &corpus.events, &ReplayOptions { dedup, ..Default::default() }, &mut sink).unwrap();
        println!("{dedup:?}: {} events, {} records, {} suppressed", s.events, s.records, s.suppressed);
    }
    // The collector was down for twenty seconds.
    let gaps = vec![Gap { start: 10_000, end: 30_000 }];
    let mut sink = MemorySink::default();
    let s = replay(specs, &corpus.events, &ReplayOptions { gaps, ..Default::default() }, &mut sink).unwrap();
    println!("with gap: {} skipped, {} records", s.events_in_gaps, s.records);
    for r in sink.records.iter().take(5) {
        println!("  {} {} {}", r.timestamp, r.snapshot_id, r.value);
    }
}
