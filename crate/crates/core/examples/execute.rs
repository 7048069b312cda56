//! Run one query over several screens and extract what it selects.

use uiq::engine::{execute, extract};
use uiq::fixtures::{self, WALKTHROUGH_QUERY};
use uiq::query::parse;
use uiq::relations::augment;

fn main() {
    let q = parse(WALKTHROUGH_QUERY).unwrap();
    let mut screens = vec![fixtures::walkthrough()];
    screens.extend(fixtures::walkthrough_variants());
    screens.push(fixtures::organic_story());
    for snap in screens {
        let g = augment(snap);
        let m = execute(&q, &g).unwrap();
        let values: Vec<_> = m.node_ids.iter().map(|&id| extract(id, &g).unwrap().value).collect();
        println!("{:<16} {values:?}", g.snapshot().snapshot_id);
    }
}
