//! Score collected records against labels, then score raw counts.

use uiq::evalkit::{compute_f1, evaluate, generate_corpus, observations, percent, CorpusParams, DEFAULT_WINDOW_MS};
use uiq::runtime::{replay, MemorySink, ReplayOptions};

fn main() {
    let params = CorpusParams { events: 120, max_targets: 2, repeat_rate: 0.3, foreign_rate: 0.1, ..Default::default() };
    let corpus = generate_corpus(11, &params);
    let specs = std::slice::from_ref(&corpus.spec);
    let mut sink = MemorySink::default();
    replay(specs, &corpus.events, &ReplayOptions::default(), &mut sink).unwrap();
    let report = evaluate(&observations(&sink.records, specs), &corpus.labels, DEFAULT_WINDOW_MS);
    println!("{}", serde_json::to_string_pretty(&report).unwrap());

    let (p, r) = (504.0 / 525.0, 506.0 / 528.0);
    println!("504/525 precision and 506/528 recall give F1 {}", percent(compute_f1(p, r)));
}
