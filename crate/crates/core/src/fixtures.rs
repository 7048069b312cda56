//! Built-in sample screens: an Instagram story ad with an advertiser name
//! above a "Sponsored" button, plus shifted variants with other advertisers.

use crate::snapshot::{NodeId, Rect, UiNode, UiSnapshot};

pub const INSTAGRAM: &str = "com.instagram.android";
pub const TEXT_VIEW: &str = "android.widget.TextView";
pub const BUTTON: &str = "android.widget.Button";
pub const FRAME_LAYOUT: &str = "android.widget.FrameLayout";
pub const SCREEN: (u32, u32) = (1080, 1920);

/// Advertiser name in a `TextView` directly above a `Sponsored` button.
pub const WALKTHROUGH_QUERY: &str =
    r#"(above (conj (hasText "Sponsored") (hasClassName "android.widget.Button")))"#;

/// The same advertiser pinned by fixed coordinates and text.
pub const COORDINATE_QUERY: &str = r#"(conj (hasScreenLocation Rect[10,100][200,150]) (hasText "apple"))"#;

fn text_node(id: u32, class: &str, text: &str, bounds: Rect) -> UiNode {
    let mut n = UiNode::new(NodeId(id), INSTAGRAM, class, bounds);
    n.text = Some(text.to_string());
    n.parent = Some(NodeId(0));
    n
}

fn story_screen(snapshot_id: &str, timestamp: i64, advertiser: &str, dx: i32, dy: i32, extra: Vec<UiNode>) -> UiSnapshot {
    let mut root = UiNode::new(NodeId(0), INSTAGRAM, FRAME_LAYOUT, Rect::new(0, 0, SCREEN.0 as i32, SCREEN.1 as i32));
    let name = text_node(1, TEXT_VIEW, advertiser, Rect::new(10 + dx, 100 + dy, 200 + dx, 150 + dy));
    let mut sponsored = text_node(2, BUTTON, "Sponsored", Rect::new(10 + dx, 160 + dy, 200 + dx, 200 + dy));
    sponsored.clickable = true;
    let mut nodes = vec![name, sponsored];
    nodes.extend(extra);
    root.children = nodes.iter().map(|n| n.id).collect();
    nodes.insert(0, root);
    UiSnapshot::from_nodes(snapshot_id, timestamp, SCREEN.0, SCREEN.1, nodes).expect("fixture is a valid tree")
}

/// The demonstration screen: root frame, "apple" at `[10,100][200,150]`
/// (`node_1`) and the "Sponsored" button at `[10,160][200,200]` (`node_2`).
pub fn walkthrough() -> UiSnapshot {
    story_screen("walkthrough", 0, "apple", 0, 0, Vec::new())
}

/// A later story ad: another advertiser at a shifted position, plus a caption
/// `TextView` further down the screen.
pub fn shifted_variant(snapshot_id: &str, timestamp: i64, advertiser: &str, dx: i32, dy: i32) -> UiSnapshot {
    let caption = text_node(3, TEXT_VIEW, "Inspiration is everywhere. Find yours.", Rect::new(40, 1500, 1040, 1600));
    story_screen(snapshot_id, timestamp, advertiser, dx, dy, vec![caption])
}

/// "nike" and "adidas" story ads, each laid out away from the original position.
pub fn walkthrough_variants() -> Vec<UiSnapshot> {
    vec![shifted_variant("variant-nike", 1_000, "nike", 250, 600), shifted_variant("variant-adidas", 2_000, "adidas", 40, 980)]
}

/// A story screen with no sponsored label: the advertiser query must not match.
pub fn organic_story() -> UiSnapshot {
    let mut root = UiNode::new(NodeId(0), INSTAGRAM, FRAME_LAYOUT, Rect::new(0, 0, SCREEN.0 as i32, SCREEN.1 as i32));
    let user = text_node(1, TEXT_VIEW, "duecelove", Rect::new(10, 100, 200, 150));
    let reply = text_node(2, BUTTON, "Reply", Rect::new(10, 1700, 300, 1800));
    root.children = vec![NodeId(1), NodeId(2)];
    UiSnapshot::from_nodes("organic", 3_000, SCREEN.0, SCREEN.1, vec![root, user, reply]).expect("fixture is a valid tree")
}

/// The demonstration screen as a hierarchy dump.
pub const WALKTHROUGH_XML: &str = r#"<?xml version='1.0' encoding='UTF-8' standalone='yes' ?>
<hierarchy rotation="0" snapshot-id="walkthrough" width="1080" height="1920">
  <node index="0" text="" resource-id="" class="android.widget.FrameLayout" package="com.instagram.android" content-desc="" clickable="false" scrollable="false" bounds="[0,0][1080,1920]">
    <node index="0" text="apple" resource-id="" class="android.widget.TextView" package="com.instagram.android" content-desc="" clickable="false" scrollable="false" bounds="[10,100][200,150]" />
    <node index="1" text="Sponsored" resource-id="" class="android.widget.Button" package="com.instagram.android" content-desc="" clickable="true" scrollable="false" bounds="[10,160][200,200]" />
  </node>
</hierarchy>
"#;
