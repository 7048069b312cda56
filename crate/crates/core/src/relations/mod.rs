//! Augmenting a snapshot into a graph of subject–predicate–object triples.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::snapshot::{NodeId, Rect, UiNode, UiSnapshot};

mod predicate;
pub mod semantic;

pub use predicate::{Category, ObjectKind, Predicate, Tier, UnknownPredicate};
pub use semantic::{parse_semantic, parse_semantic_with, SemanticToggles};

/// Object position of a triple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObjectValue {
    Node(NodeId),
    String(String),
    Number(OrderedFloat<f64>),
    Boolean(bool),
    Rect(Rect),
}

impl ObjectValue {
    pub fn kind(&self) -> ObjectKind {
        match self {
            ObjectValue::Node(_) => ObjectKind::Node,
            ObjectValue::String(_) => ObjectKind::String,
            ObjectValue::Number(_) => ObjectKind::Number,
            ObjectValue::Boolean(_) => ObjectKind::Boolean,
            ObjectValue::Rect(_) => ObjectKind::Rect,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            ObjectValue::Number(n) => Some(n.0),
            _ => None,
        }
    }

    pub fn as_node(&self) -> Option<NodeId> {
        match self {
            ObjectValue::Node(n) => Some(*n),
            _ => None,
        }
    }

    pub fn number(v: f64) -> Self {
        // -0.0 and 0.0 must index identically
        ObjectValue::Number(OrderedFloat(if v == 0.0 { 0.0 } else { v }))
    }
}

impl fmt::Display for ObjectValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectValue::Node(n) => write!(f, "{n}"),
            ObjectValue::String(s) => write!(f, "{s:?}"),
            ObjectValue::Number(n) => write!(f, "{}", n.0),
            ObjectValue::Boolean(b) => write!(f, "{b}"),
            ObjectValue::Rect(r) => write!(f, "Rect{r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: NodeId,
    pub predicate: Predicate,
    pub object: ObjectValue,
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.predicate, self.object)
    }
}

/// Thresholds for the computed spatial relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SpatialThresholds {
    /// Minimum shared extent on the cross axis for above/below/left/right.
    pub min_overlap_px: i32,
    /// `near` when center distance ≤ this fraction of the screen diagonal.
    pub near_diagonal_fraction: f64,
    /// `nextTo` when the horizontal gap ≤ this fraction of the screen width.
    pub next_to_width_fraction: f64,
}

impl Default for SpatialThresholds {
    fn default() -> Self {
        SpatialThresholds { min_overlap_px: 1, near_diagonal_fraction: 0.10, next_to_width_fraction: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct RelationConfig {
    pub spatial: SpatialThresholds,
    pub semantic: SemanticToggles,
}

/// Spatial predicates that hold from `a` to `b` (read "a <predicate> b").
pub fn spatial_relations(a: &UiNode, b: &UiNode, screen: (u32, u32), t: &SpatialThresholds) -> BTreeSet<Predicate> {
    let mut out = BTreeSet::new();
    if a.id == b.id {
        return out;
    }
    let (ra, rb) = (a.bounds, b.bounds);
    let h_overlap = ra.right.min(rb.right) - ra.left.max(rb.left);
    let v_overlap = ra.bottom.min(rb.bottom) - ra.top.max(rb.top);

    let above = |x: &Rect, y: &Rect| x.bottom <= y.top && x.top < y.top;
    let left_of = |x: &Rect, y: &Rect| x.right <= y.left && x.left < y.left;

    if h_overlap >= t.min_overlap_px {
        if above(&ra, &rb) {
            out.insert(Predicate::Above);
        }
        if above(&rb, &ra) {
            out.insert(Predicate::Below);
        }
    }
    let mut horizontal_gap = None;
    if v_overlap >= t.min_overlap_px {
        if left_of(&ra, &rb) {
            out.insert(Predicate::Left);
            horizontal_gap = Some(rb.left - ra.right);
        }
        if left_of(&rb, &ra) {
            out.insert(Predicate::Right);
            horizontal_gap = Some(ra.left - rb.right);
        }
    }

    let (ax, ay) = ra.center();
    let (bx, by) = rb.center();
    let diagonal = (screen.0 as f64).hypot(screen.1 as f64);
    if (ax - bx).hypot(ay - by) <= t.near_diagonal_fraction * diagonal {
        out.insert(Predicate::Near);
    }
    if let Some(gap) = horizontal_gap {
        if gap as f64 <= t.next_to_width_fraction * screen.0 as f64 {
            out.insert(Predicate::NextTo);
        }
    }
    out
}

/// Zero-based position among the parent's children, only inside scrollable parents.
pub fn list_order(node: &UiNode, snapshot: &UiSnapshot) -> Option<u32> {
    let parent = snapshot.node(node.parent?)?;
    if !parent.scrollable {
        return None;
    }
    parent.children.iter().position(|c| *c == node.id).map(|i| i as u32)
}

/// A snapshot together with its triples and lookup indexes. Immutable.
#[derive(Debug, Clone)]
pub struct UiGraph {
    snapshot: UiSnapshot,
    triples: Vec<Triple>,
    by_subject: BTreeMap<NodeId, std::ops::Range<usize>>,
    by_object: HashMap<(Predicate, ObjectValue), Vec<NodeId>>,
}

pub fn augment(snapshot: UiSnapshot) -> UiGraph {
    augment_with(snapshot, &RelationConfig::default())
}

pub fn augment_with(snapshot: UiSnapshot, config: &RelationConfig) -> UiGraph {
    let mut set = BTreeSet::new();
    let screen = (snapshot.screen_width, snapshot.screen_height);
    let mut add = |subject: NodeId, predicate: Predicate, object: ObjectValue| {
        debug_assert_eq!(predicate.object_kind(), object.kind(), "{predicate}");
        set.insert(Triple { subject, predicate, object });
    };

    for node in snapshot.nodes.values() {
        let id = node.id;
        add(id, Predicate::HasPackageName, ObjectValue::String(node.package_name.clone()));
        add(id, Predicate::HasClassName, ObjectValue::String(node.class_name.clone()));
        add(id, Predicate::HasScreenLocation, ObjectValue::Rect(node.bounds));
        add(id, Predicate::IsClickable, ObjectValue::Boolean(node.clickable));
        add(id, Predicate::IsEditable, ObjectValue::Boolean(node.editable));
        add(id, Predicate::IsScrollable, ObjectValue::Boolean(node.scrollable));
        if let Some(text) = &node.text {
            add(id, Predicate::HasText, ObjectValue::String(text.clone()));
            for (p, v) in parse_semantic_with(text, &config.semantic) {
                add(id, p, v);
            }
        }
        if let Some(desc) = &node.content_description {
            add(id, Predicate::HasContentDescription, ObjectValue::String(desc.clone()));
        }
        if let Some(view_id) = &node.view_id {
            add(id, Predicate::HasViewId, ObjectValue::String(view_id.clone()));
        }

        if let Some(parent_id) = node.parent {
            let parent = &snapshot.nodes[&parent_id];
            add(id, Predicate::HasParent, ObjectValue::Node(parent_id));
            if let Some(t) = &parent.text {
                add(id, Predicate::HasParentText, ObjectValue::String(t.clone()));
            }
            for sibling in parent.children.iter().filter(|c| **c != id) {
                if let Some(t) = &snapshot.nodes[sibling].text {
                    add(id, Predicate::HasSiblingText, ObjectValue::String(t.clone()));
                }
            }
            if let Some(order) = list_order(node, &snapshot) {
                add(id, Predicate::HasListOrder, ObjectValue::number(order as f64));
            }
        }
        for child in &node.children {
            add(id, Predicate::HasChild, ObjectValue::Node(*child));
            if let Some(t) = &snapshot.nodes[child].text {
                add(id, Predicate::HasChildText, ObjectValue::String(t.clone()));
            }
        }
    }

    let nodes: Vec<&UiNode> = snapshot.nodes.values().collect();
    for a in &nodes {
        for b in &nodes {
            if a.id == b.id {
                continue;
            }
            for p in spatial_relations(a, b, screen, &config.spatial) {
                add(a.id, p, ObjectValue::Node(b.id));
            }
        }
    }

    let triples: Vec<Triple> = set.into_iter().collect();
    let mut by_subject = BTreeMap::new();
    let mut by_object: HashMap<(Predicate, ObjectValue), Vec<NodeId>> = HashMap::new();
    let mut start = 0;
    for (i, t) in triples.iter().enumerate() {
        if i + 1 == triples.len() || triples[i + 1].subject != t.subject {
            by_subject.insert(t.subject, start..i + 1);
            start = i + 1;
        }
        by_object.entry((t.predicate, t.object.clone())).or_default().push(t.subject);
    }
    UiGraph { snapshot, triples, by_subject, by_object }
}

impl UiGraph {
    pub fn snapshot(&self) -> &UiSnapshot {
        &self.snapshot
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// All triples whose subject is `id`, sorted by predicate then object.
    pub fn triples_of(&self, id: NodeId) -> &[Triple] {
        self.by_subject.get(&id).map(|r| &self.triples[r.clone()]).unwrap_or(&[])
    }

    /// Objects of `(id, predicate, _)`.
    pub fn objects(&self, id: NodeId, predicate: Predicate) -> impl Iterator<Item = &ObjectValue> {
        self.triples_of(id).iter().filter(move |t| t.predicate == predicate).map(|t| &t.object)
    }

    /// Subjects `s` with `(s, predicate, object)`, ascending.
    pub fn subjects(&self, predicate: Predicate, object: &ObjectValue) -> &[NodeId] {
        self.by_object.get(&(predicate, object.clone())).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_triple(&self, subject: NodeId, predicate: Predicate, object: &ObjectValue) -> bool {
        self.objects(subject, predicate).any(|o| o == object)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.snapshot.nodes.keys().copied()
    }
}
