//! Parse a query, print its canonical form, English rendering and tiers.
//!
//! cargo run -p uiq --example explain -- '(above (hasText "Sponsored"))'

use uiq::fixtures::WALKTHROUGH_QUERY;
use uiq::query::{parse, print, render_nl};

fn main() {
    let text = std::env::args().nth(1).unwrap_or_else(|| WALKTHROUGH_QUERY.to_string());
    let q = match parse(&text) {
        Ok(q) => q,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    println!("canonical: {}", print(&q));
    println!("english:   {}", render_nl(&q));
    for p in q.predicates() {
        println!("  {:<24} {:?}", p.name(), p.tier());
    }
    println!("worst tier: {:?}", q.worst_tier());
}
