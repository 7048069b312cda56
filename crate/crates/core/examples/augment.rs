//! Build the relation graph for a screen and list its triples.

use uiq::fixtures;
use uiq::relations::{augment, Predicate};

fn main() {
    let g = augment(fixtures::walkthrough());
    println!("{} triples", g.len());
    for t in g.triples() {
        println!("  {t}");
    }
    let spatial: Vec<_> = g.triples().iter().filter(|t| Predicate::SPATIAL.contains(&t.predicate)).collect();
    println!("{} spatial", spatial.len());
}
