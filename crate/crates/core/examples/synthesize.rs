//! Demonstrate the advertiser name, synthesize candidates, and check which
//! ones still work on later screens.

use uiq::engine::{execute, extract, synthesize, SynthesisConfig};
use uiq::fixtures;
use uiq::relations::augment;
use uiq::snapshot::NodeId;

fn main() {
    let g = augment(fixtures::walkthrough());
    let candidates = synthesize(&g, NodeId(1), &SynthesisConfig::default()).expect("target exists");
    let variants: Vec<_> = fixtures::walkthrough_variants().into_iter().map(augment).collect();
    for (i, c) in candidates.iter().enumerate() {
        println!("{}. [{:?}, {} predicates, {:?}] {}", i + 1, c.score.worst_tier, c.score.predicate_count, c.family, c.text());
        println!("   {}", c.nl);
        for v in &variants {
            let m = execute(&c.query.root, v).unwrap();
            let values: Vec<_> = m.node_ids.iter().filter_map(|&id| extract(id, v).ok()).map(|e| e.value).collect();
            println!("   on {}: {values:?}", v.snapshot().snapshot_id);
        }
    }
}
