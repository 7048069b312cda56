//! Parse a hierarchy dump and print the resulting tree.
//!
//! cargo run -p uiq --example ingest [path.xml|path.json]

use uiq::fixtures::WALKTHROUGH_XML;
use uiq::snapshot::{parse_snapshot, serialize_json};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => WALKTHROUGH_XML.to_string(),
    };
    let snap = parse_snapshot(&text)?;
    println!("{}: {} nodes, screen {}x{}", snap.snapshot_id, snap.len(), snap.screen_width, snap.screen_height);
    for id in snap.preorder() {
        let n = snap.node(id).unwrap();
        let indent = "  ".repeat(snap.depth(id));
        println!("{indent}{} {} {:?} {}", n.id, n.short_class_name(), n.text.as_deref().unwrap_or(""), n.bounds);
    }
    println!("\n{}", serialize_json(&snap));
    Ok(())
}
