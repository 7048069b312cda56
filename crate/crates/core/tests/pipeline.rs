use uiq::evalkit::{evaluate, generate_corpus, observations, CorpusParams, DEFAULT_WINDOW_MS};
use uiq::runtime::{replay, DedupMode, MemorySink, ReplayOptions};

fn run(seed: u64, params: &CorpusParams, dedup: DedupMode) -> (f64, usize, usize) {
    let corpus = generate_corpus(seed, params);
    let mut sink = MemorySink::default();
    let opts = ReplayOptions { dedup, ..Default::default() };
    let summary = replay(std::slice::from_ref(&corpus.spec), &corpus.events, &opts, &mut sink).unwrap();
    assert_eq!(summary.records, sink.records.len());
    let obs = observations(&sink.records, std::slice::from_ref(&corpus.spec));
    let report = evaluate(&obs, &corpus.labels, DEFAULT_WINDOW_MS);
    (report.overall.f1, report.overall.true_positives, corpus.labels.len())
}

#[test]
fn corpus_without_dedup_is_perfect() {
    let p = CorpusParams { events: 60, min_targets: 0, max_targets: 3, foreign_rate: 0.2, repeat_rate: 0.4, ..Default::default() };
    for seed in 0..5 {
        let (f1, tp, labels) = run(seed, &p, DedupMode::Disabled);
        assert_eq!(tp, labels);
        assert_eq!(f1, 100.0);
    }
}

#[test]
fn dedup_never_adds_records() {
    let p = CorpusParams { events: 60, max_targets: 2, repeat_rate: 0.5, ..Default::default() };
    let (_, with, _) = run(3, &p, DedupMode::Enabled);
    let (_, without, _) = run(3, &p, DedupMode::Disabled);
    assert!(with <= without);
}
