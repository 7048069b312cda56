mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_snapshot, reference_nodes, to_xml, XmlReader};
use uiq::fixtures;
use uiq::snapshot::{parse_xml_dump, NodeId};

#[test]
fn walkthrough_dump_matches_reference_reader() {
    let parsed = parse_xml_dump(fixtures::WALKTHROUGH_XML).unwrap();
    let reference = reference_nodes(&XmlReader::parse(fixtures::WALKTHROUGH_XML).unwrap());
    assert_eq!(parsed.nodes.values().cloned().collect::<Vec<_>>(), reference);
    assert_eq!(parsed.nodes, fixtures::walkthrough().nodes);
}

#[test]
fn entities_decode_like_the_reference() {
    let xml = r#"<hierarchy><node text="Tom &amp; Jerry &lt;3 &#233;&#x41;" content-desc='say "hi"' bounds="[0,0][10,10]"/></hierarchy>"#;
    let parsed = parse_xml_dump(xml).unwrap();
    let reference = reference_nodes(&XmlReader::parse(xml).unwrap());
    assert_eq!(parsed.root().text.as_deref(), Some("Tom & Jerry <3 éA"));
    assert_eq!(parsed.nodes.values().cloned().collect::<Vec<_>>(), reference);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dumps_agree_with_reference_reader(seed in any::<u64>()) {
        let snap = random_snapshot(&mut ChaCha8Rng::seed_from_u64(seed), 40);
        let xml = to_xml(&snap);
        let parsed = parse_xml_dump(&xml).unwrap();
        let reference = reference_nodes(&XmlReader::parse(&xml).unwrap());
        prop_assert_eq!(parsed.nodes.values().cloned().collect::<Vec<_>>(), reference);
        prop_assert_eq!(parsed.screen_width, snap.screen_width);
        prop_assert_eq!(&parsed.snapshot_id, &snap.snapshot_id);

        // Same tree as the source, renumbered in pre-order.
        let order = snap.preorder();
        prop_assert_eq!(order.len(), parsed.len());
        for (k, orig) in order.iter().enumerate() {
            let a = snap.node(*orig).unwrap();
            let b = parsed.node(NodeId(k as u32)).unwrap();
            prop_assert_eq!(&a.text, &b.text);
            prop_assert_eq!(a.bounds, b.bounds);
            prop_assert_eq!(a.children.len(), b.children.len());
        }
    }
}
