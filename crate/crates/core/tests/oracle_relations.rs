mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{graph_triples, oracle_spatial, oracle_triples, random_snapshot};
use uiq::fixtures;
use uiq::relations::{augment, spatial_relations, Predicate, SpatialThresholds};
use uiq::snapshot::{NodeId, Rect, UiNode};

fn node(id: u32, r: Rect) -> UiNode {
    UiNode::new(NodeId(id), "p", "c", r)
}

#[test]
fn walkthrough_triples_match_recomputation() {
    let snap = fixtures::walkthrough();
    let expected = oracle_triples(&snap).unwrap();
    assert_eq!(graph_triples(&augment(snap)), expected);
}

#[test]
fn spatial_edge_cases() {
    let screen = (1080, 1920);
    let t = SpatialThresholds::default();
    let cases = [
        // Touching edges count as above.
        (Rect::new(0, 0, 10, 10), Rect::new(0, 10, 10, 20)),
        // One pixel of horizontal overlap.
        (Rect::new(0, 0, 10, 10), Rect::new(9, 20, 30, 30)),
        // Zero overlap.
        (Rect::new(0, 0, 10, 10), Rect::new(10, 20, 30, 30)),
        // Zero-height rectangle on the edge.
        (Rect::new(0, 10, 10, 10), Rect::new(0, 10, 10, 20)),
        // Gap of exactly 5% of the width.
        (Rect::new(0, 0, 100, 50), Rect::new(154, 0, 200, 50)),
        (Rect::new(0, 0, 100, 50), Rect::new(155, 0, 200, 50)),
    ];
    for (a, b) in cases {
        let got = spatial_relations(&node(1, a), &node(2, b), screen, &t);
        assert_eq!(Some(got), oracle_spatial(&a, &b, screen), "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn augment_matches_pairwise_recomputation(seed in any::<u64>()) {
        let snap = random_snapshot(&mut ChaCha8Rng::seed_from_u64(seed), 30);
        if let Some(expected) = oracle_triples(&snap) {
            prop_assert_eq!(graph_triples(&augment(snap)), expected);
        }
    }

    #[test]
    fn spatial_inverses_hold(
        a in (0i32..500, 0i32..500, 0i32..300, 0i32..300),
        b in (0i32..500, 0i32..500, 0i32..300, 0i32..300),
    ) {
        let ra = Rect::new(a.0, a.1, a.0 + a.2, a.1 + a.3);
        let rb = Rect::new(b.0, b.1, b.0 + b.2, b.1 + b.3);
        let t = SpatialThresholds::default();
        let ab = spatial_relations(&node(1, ra), &node(2, rb), (1080, 1920), &t);
        let ba = spatial_relations(&node(2, rb), &node(1, ra), (1080, 1920), &t);
        for p in Predicate::SPATIAL {
            prop_assert_eq!(ab.contains(&p), ba.contains(&p.inverse().unwrap()), "{}", p);
        }
        prop_assert!(!(ab.contains(&Predicate::Above) && ab.contains(&Predicate::Below)));
        if let Some(expected) = oracle_spatial(&ra, &rb, (1080, 1920)) {
            prop_assert_eq!(ab, expected);
        }
    }
}
