//! UI snapshot data model and ingestion.
//!
//! A [`UiSnapshot`] is one screen's element tree. Node ids are assigned by
//! depth-first pre-order at ingest, so `node_0` is always the root of an XML
//! dump and ids are stable for a given input text.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod xml;

pub use xml::parse_xml_dump;

/// Version tag carried by the JSON snapshot format.
pub const SNAPSHOT_SCHEMA: &str = "uiq-snapshot/1";

/// Identifier of a node, unique within one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node_{}", self.0)
    }
}

/// Pixel bounds in screen coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rect {
    pub left: i32,
    pub top: i32,
    pub right: i32,
    pub bottom: i32,
}

impl Rect {
    pub const fn new(left: i32, top: i32, right: i32, bottom: i32) -> Self {
        Rect { left, top, right, bottom }
    }

    pub fn is_valid(&self) -> bool {
        self.left <= self.right && self.top <= self.bottom
    }

    pub fn width(&self) -> i32 {
        self.right - self.left
    }

    pub fn height(&self) -> i32 {
        self.bottom - self.top
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.left as f64 + self.right as f64) / 2.0,
            (self.top as f64 + self.bottom as f64) / 2.0,
        )
    }

    pub fn contains_point(&self, x: i32, y: i32) -> bool {
        x >= self.left && x <= self.right && y >= self.top && y <= self.bottom
    }
}

impl fmt::Display for Rect {
    /// Same notation as the hierarchy dump: `[x1,y1][x2,y2]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}][{},{}]", self.left, self.top, self.right, self.bottom)
    }
}

/// One element of the UI hierarchy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct UiNode {
    pub id: NodeId,
    #[serde(default)]
    pub package_name: String,
    #[serde(default)]
    pub class_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view_id: Option<String>,
    #[serde(default)]
    pub clickable: bool,
    #[serde(default)]
    pub editable: bool,
    #[serde(default)]
    pub scrollable: bool,
    pub bounds: Rect,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<NodeId>,
    #[serde(default)]
    pub children: Vec<NodeId>,
}

impl UiNode {
    /// A bare node with the given id, class and bounds; all other fields empty.
    pub fn new(id: NodeId, package_name: &str, class_name: &str, bounds: Rect) -> Self {
        UiNode {
            id,
            package_name: package_name.to_string(),
            class_name: class_name.to_string(),
            text: None,
            content_description: None,
            view_id: None,
            clickable: false,
            editable: false,
            scrollable: false,
            bounds,
            parent: None,
            children: Vec::new(),
        }
    }

    /// Widget short name: `android.widget.Button` becomes `Button`.
    pub fn short_class_name(&self) -> &str {
        short_class_name(&self.class_name)
    }
}

pub fn short_class_name(class_name: &str) -> &str {
    class_name.rsplit('.').next().unwrap_or(class_name)
}

/// One screen's element tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UiSnapshot {
    pub snapshot_id: String,
    pub timestamp: i64,
    pub screen_width: u32,
    pub screen_height: u32,
    pub root_id: NodeId,
    pub nodes: BTreeMap<NodeId, UiNode>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SnapshotError {
    #[error("xml parse error at {line}:{column}: {message}")]
    Xml { line: u32, column: u32, message: String },
    #[error("invalid `{field}` on {path}: {message}")]
    Field { path: String, field: String, message: String },
    #[error("json schema error at {line}:{column}: {message}")]
    Schema { line: usize, column: usize, message: String },
    #[error("structure error: {0}")]
    Structure(String),
}

impl UiSnapshot {
    /// Assembles a snapshot from nodes and validates it.
    pub fn from_nodes(
        snapshot_id: impl Into<String>,
        timestamp: i64,
        screen_width: u32,
        screen_height: u32,
        nodes: Vec<UiNode>,
    ) -> Result<Self, SnapshotError> {
        let mut map = BTreeMap::new();
        for node in nodes {
            let id = node.id;
            if map.insert(id, node).is_some() {
                return Err(SnapshotError::Structure(format!("duplicate node id {}", id.0)));
            }
        }
        let roots: Vec<NodeId> = map.values().filter(|n| n.parent.is_none()).map(|n| n.id).collect();
        let root_id = match roots.as_slice() {
            [] if map.is_empty() => return Err(SnapshotError::Structure("no root node".into())),
            [] => return Err(SnapshotError::Structure("no root node (every node has a parent)".into())),
            [root] => *root,
            _ => {
                return Err(SnapshotError::Structure(format!(
                    "multiple roots: {}",
                    roots.iter().map(|r| r.0.to_string()).collect::<Vec<_>>().join(", ")
                )))
            }
        };
        let snapshot = UiSnapshot {
            snapshot_id: snapshot_id.into(),
            timestamp,
            screen_width,
            screen_height,
            root_id,
            nodes: map,
        };
        snapshot.validate()?;
        Ok(snapshot)
    }

    pub fn node(&self, id: NodeId) -> Option<&UiNode> {
        self.nodes.get(&id)
    }

    pub fn root(&self) -> &UiNode {
        &self.nodes[&self.root_id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Distinct package names present, sorted.
    pub fn package_names(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.nodes.values().map(|n| n.package_name.as_str()).collect();
        set.into_iter().map(str::to_string).collect()
    }

    /// Checks the tree invariants: one root, resolvable links, no cycles,
    /// every node reachable from the root, well-formed bounds.
    pub fn validate(&self) -> Result<(), SnapshotError> {
        let root = self
            .nodes
            .get(&self.root_id)
            .ok_or_else(|| SnapshotError::Structure(format!("root id {} not found", self.root_id.0)))?;
        if root.parent.is_some() {
            return Err(SnapshotError::Structure("root node has a parent".into()));
        }
        for (key, node) in &self.nodes {
            if *key != node.id {
                return Err(SnapshotError::Structure(format!("node key {} holds id {}", key.0, node.id.0)));
            }
            if !node.bounds.is_valid() {
                return Err(SnapshotError::Field {
                    path: node.id.to_string(),
                    field: "bounds".into(),
                    message: format!("{} has left > right or top > bottom", node.bounds),
                });
            }
            if node.parent.is_none() && node.id != self.root_id {
                return Err(SnapshotError::Structure(format!("multiple roots: {} and {}", self.root_id.0, node.id.0)));
            }
            if let Some(parent) = node.parent {
                let p = self.nodes.get(&parent).ok_or_else(|| {
                    SnapshotError::Structure(format!("node {} has dangling parent {}", node.id.0, parent.0))
                })?;
                if !p.children.contains(&node.id) {
                    return Err(SnapshotError::Structure(format!(
                        "node {} names parent {} which does not list it as a child",
                        node.id.0, parent.0
                    )));
                }
            }
            let mut seen = BTreeSet::new();
            for child in &node.children {
                if !seen.insert(*child) {
                    return Err(SnapshotError::Structure(format!("node {} lists child {} twice", node.id.0, child.0)));
                }
                let c = self.nodes.get(child).ok_or_else(|| {
                    SnapshotError::Structure(format!("node {} has dangling child {}", node.id.0, child.0))
                })?;
                if c.parent != Some(node.id) {
                    return Err(SnapshotError::Structure(format!(
                        "child {} of node {} does not point back to it",
                        child.0, node.id.0
                    )));
                }
            }
        }
        // With consistent parent/child links every node has at most one parent,
        // so reaching all nodes from the root rules out cycles as well.
        let mut visited = BTreeSet::new();
        let mut stack = vec![self.root_id];
        while let Some(id) = stack.pop() {
            if !visited.insert(id) {
                return Err(SnapshotError::Structure(format!("cycle through node {}", id.0)));
            }
            stack.extend(self.nodes[&id].children.iter().rev().copied());
        }
        if visited.len() != self.nodes.len() {
            let orphan = self.nodes.keys().find(|id| !visited.contains(id)).unwrap();
            return Err(SnapshotError::Structure(format!("node {} is unreachable from the root", orphan.0)));
        }
        Ok(())
    }

    /// Node ids in depth-first pre-order from the root.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root_id];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.nodes[&id].children.iter().rev().copied());
        }
        out
    }

    /// Depth of a node below the root (root = 0).
    pub fn depth(&self, id: NodeId) -> usize {
        let mut depth = 0;
        let mut cur = self.nodes.get(&id).and_then(|n| n.parent);
        while let Some(p) = cur {
            depth += 1;
            cur = self.nodes[&p].parent;
        }
        depth
    }

    /// The deepest node whose bounds contain the point; later siblings win ties.
    pub fn hit_test(&self, x: i32, y: i32) -> Option<NodeId> {
        let mut best: Option<(usize, NodeId)> = None;
        for id in self.preorder() {
            if self.nodes[&id].bounds.contains_point(x, y) {
                let d = self.depth(id);
                if best.is_none_or(|(bd, _)| d >= bd) {
                    best = Some((d, id));
                }
            }
        }
        best.map(|(_, id)| id)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct SnapshotDoc {
    schema: String,
    snapshot_id: String,
    timestamp: i64,
    screen_width: u32,
    screen_height: u32,
    root_id: NodeId,
    nodes: Vec<UiNode>,
}

/// Parses the `uiq-snapshot/1` JSON format.
pub fn parse_json_snapshot(text: &str) -> Result<UiSnapshot, SnapshotError> {
    let doc: SnapshotDoc = serde_json::from_str(text).map_err(|e| SnapshotError::Schema {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    snapshot_from_doc(doc)
}

/// Same as [`parse_json_snapshot`] for an already-decoded JSON value.
pub fn snapshot_from_value(value: serde_json::Value) -> Result<UiSnapshot, SnapshotError> {
    let doc: SnapshotDoc = serde_json::from_value(value).map_err(|e| SnapshotError::Schema {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    snapshot_from_doc(doc)
}

fn snapshot_from_doc(doc: SnapshotDoc) -> Result<UiSnapshot, SnapshotError> {
    if doc.schema != SNAPSHOT_SCHEMA {
        return Err(SnapshotError::Field {
            path: "$".into(),
            field: "schema".into(),
            message: format!("expected \"{SNAPSHOT_SCHEMA}\", found \"{}\"", doc.schema),
        });
    }
    let mut nodes = doc.nodes;
    for node in &mut nodes {
        normalize_optional(&mut node.text);
        normalize_optional(&mut node.content_description);
        normalize_optional(&mut node.view_id);
    }
    let snapshot = UiSnapshot::from_nodes(doc.snapshot_id, doc.timestamp, doc.screen_width, doc.screen_height, nodes)?;
    if snapshot.root_id != doc.root_id {
        return Err(SnapshotError::Structure(format!(
            "rootId {} does not match the parentless node {}",
            doc.root_id.0, snapshot.root_id.0
        )));
    }
    Ok(snapshot)
}

pub(crate) fn normalize_optional(value: &mut Option<String>) {
    if value.as_deref() == Some("") {
        *value = None;
    }
}

/// Either format, chosen by the first non-blank character (`<` means XML).
pub fn parse_snapshot(text: &str) -> Result<UiSnapshot, SnapshotError> {
    if text.trim_start().starts_with('<') {
        parse_xml_dump(text)
    } else {
        parse_json_snapshot(text)
    }
}

/// Canonical JSON: sorted keys, nodes ordered by id, compact.
pub fn serialize_json(snapshot: &UiSnapshot) -> String {
    serde_json::to_string(&snapshot_to_value(snapshot)).expect("snapshot serializes")
}

/// The canonical document as a JSON value (object keys sorted).
pub fn snapshot_to_value(snapshot: &UiSnapshot) -> serde_json::Value {
    let doc = SnapshotDoc {
        schema: SNAPSHOT_SCHEMA.to_string(),
        snapshot_id: snapshot.snapshot_id.clone(),
        timestamp: snapshot.timestamp,
        screen_width: snapshot.screen_width,
        screen_height: snapshot.screen_height,
        root_id: snapshot.root_id,
        nodes: snapshot.nodes.values().cloned().collect(),
    };
    // serde_json's Map is a BTreeMap without `preserve_order`, which sorts keys.
    serde_json::to_value(&doc).expect("snapshot serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: u32, parent: Option<u32>, children: &[u32]) -> UiNode {
        let mut n = UiNode::new(NodeId(id), "pkg", "android.view.View", Rect::new(0, 0, 10, 10));
        n.parent = parent.map(NodeId);
        n.children = children.iter().copied().map(NodeId).collect();
        n
    }

    #[test]
    fn single_node_json() {
        let text = r#"{"schema":"uiq-snapshot/1","snapshotId":"s","timestamp":5,"screenWidth":100,"screenHeight":200,"rootId":0,
            "nodes":[{"id":0,"packageName":"p","className":"c","bounds":{"left":0,"top":0,"right":1,"bottom":1}}]}"#;
        let s = parse_json_snapshot(text).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.root_id, NodeId(0));
        assert!(!s.root().clickable);
    }

    #[test]
    fn dangling_child_is_structure_error() {
        let err = UiSnapshot::from_nodes("s", 0, 10, 10, vec![node(0, None, &[1])]).unwrap_err();
        assert!(matches!(err, SnapshotError::Structure(_)), "{err}");
    }

    #[test]
    fn multiple_roots_rejected() {
        let err = UiSnapshot::from_nodes("s", 0, 10, 10, vec![node(0, None, &[]), node(1, None, &[])]).unwrap_err();
        assert!(err.to_string().contains("multiple roots"));
    }

    #[test]
    fn cycle_rejected() {
        // 0 is root; 1 and 2 point at each other and are unreachable.
        let err = UiSnapshot::from_nodes(
            "s",
            0,
            10,
            10,
            vec![node(0, None, &[]), node(1, Some(2), &[2]), node(2, Some(1), &[1])],
        )
        .unwrap_err();
        assert!(matches!(err, SnapshotError::Structure(_)));
    }

    #[test]
    fn parent_must_list_child() {
        let err = UiSnapshot::from_nodes("s", 0, 10, 10, vec![node(0, None, &[]), node(1, Some(0), &[])]).unwrap_err();
        assert!(err.to_string().contains("does not list it"));
    }

    #[test]
    fn bad_rect_is_field_error() {
        let mut n = node(0, None, &[]);
        n.bounds = Rect::new(10, 0, 5, 5);
        let err = UiSnapshot::from_nodes("s", 0, 10, 10, vec![n]).unwrap_err();
        assert!(matches!(err, SnapshotError::Field { .. }));
    }

    #[test]
    fn offscreen_bounds_allowed() {
        let mut n = node(0, None, &[]);
        n.bounds = Rect::new(-50, 3000, 20, 3100);
        assert!(UiSnapshot::from_nodes("s", 0, 10, 10, vec![n]).is_ok());
    }

    #[test]
    fn schema_tag_checked() {
        let text = r#"{"schema":"other/1","snapshotId":"s","timestamp":5,"screenWidth":100,"screenHeight":200,"rootId":0,
            "nodes":[{"id":0,"bounds":{"left":0,"top":0,"right":1,"bottom":1}}]}"#;
        let err = parse_json_snapshot(text).unwrap_err();
        assert!(matches!(err, SnapshotError::Field { ref field, .. } if field == "schema"));
    }

    #[test]
    fn missing_field_reports_position() {
        let err = parse_json_snapshot("{\n\"schema\":\"uiq-snapshot/1\"}").unwrap_err();
        assert!(matches!(err, SnapshotError::Schema { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn empty_strings_normalize_to_absent() {
        let text = r#"{"schema":"uiq-snapshot/1","snapshotId":"s","timestamp":5,"screenWidth":100,"screenHeight":200,"rootId":0,
            "nodes":[{"id":0,"text":"","bounds":{"left":0,"top":0,"right":1,"bottom":1}}]}"#;
        assert_eq!(parse_json_snapshot(text).unwrap().root().text, None);
    }

    #[test]
    fn hit_test_prefers_deepest() {
        let mut root = node(0, None, &[1]);
        root.bounds = Rect::new(0, 0, 100, 100);
        let mut child = node(1, Some(0), &[]);
        child.bounds = Rect::new(10, 10, 20, 20);
        let s = UiSnapshot::from_nodes("s", 0, 100, 100, vec![root, child]).unwrap();
        assert_eq!(s.hit_test(15, 15), Some(NodeId(1)));
        assert_eq!(s.hit_test(50, 50), Some(NodeId(0)));
        assert_eq!(s.hit_test(500, 50), None);
    }
}
