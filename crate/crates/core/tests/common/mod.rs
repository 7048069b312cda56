//! Independent reference implementations and random inputs shared by the
//! integration tests.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use uiq::evalkit::{GroundTruthLabel, Observation};
use uiq::query::{Literal, QueryAst};
use uiq::relations::{parse_semantic, ObjectValue, Predicate, UiGraph};
use uiq::snapshot::{NodeId, Rect, UiNode, UiSnapshot};

pub type TripleSet = BTreeSet<(NodeId, Predicate, ObjectValue)>;

pub const CLASSES: &[&str] = &[
    "android.widget.TextView",
    "android.widget.Button",
    "android.widget.ImageView",
    "android.widget.LinearLayout",
];
pub const TEXTS: &[&str] = &[
    "Sponsored", "apple", "nike", "Like", "$4.99", "50%", "3:12 PM", "Reply", "12", "apple", "72°F", "Jan 5, 2024",
];
pub const DESCRIPTIONS: &[&str] = &["Share", "Profile picture", "More options"];
pub const VIEW_IDS: &[&str] = &["com.example:id/title", "com.example:id/action"];
pub const SCREEN: (u32, u32) = (1080, 1920);

/// A random tree of up to `max_nodes` nodes with overlapping layouts,
/// repeated texts and a few scrollable lists.
pub fn random_snapshot(rng: &mut ChaCha8Rng, max_nodes: usize) -> UiSnapshot {
    let n = rng.gen_range(1..=max_nodes.max(1));
    let mut nodes: Vec<UiNode> = Vec::with_capacity(n);
    let mut root = UiNode::new(NodeId(0), "com.example", "android.widget.FrameLayout", Rect::new(0, 0, 1080, 1920));
    root.scrollable = rng.gen_bool(0.2);
    nodes.push(root);
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        let l = rng.gen_range(0..1000);
        let t = rng.gen_range(0..1850);
        let w = if rng.gen_bool(0.05) { 0 } else { rng.gen_range(1..300) };
        let h = rng.gen_range(1..200);
        let class = CLASSES.choose(rng).unwrap();
        let mut node = UiNode::new(NodeId(i as u32), "com.example", class, Rect::new(l, t, (l + w).min(1080), (t + h).min(1920)));
        if rng.gen_bool(0.6) {
            node.text = Some(TEXTS.choose(rng).unwrap().to_string());
        }
        if rng.gen_bool(0.2) {
            node.content_description = Some(DESCRIPTIONS.choose(rng).unwrap().to_string());
        }
        if rng.gen_bool(0.2) {
            node.view_id = Some(VIEW_IDS.choose(rng).unwrap().to_string());
        }
        node.clickable = rng.gen_bool(0.3);
        node.editable = rng.gen_bool(0.1);
        node.scrollable = rng.gen_bool(0.2);
        node.parent = Some(NodeId(parent as u32));
        nodes[parent].children.push(node.id);
        nodes.push(node);
    }
    let id = format!("random-{}", rng.gen::<u32>());
    UiSnapshot::from_nodes(id, 0, SCREEN.0, SCREEN.1, nodes).expect("generated tree is valid")
}

fn overlap(a0: i32, a1: i32, b0: i32, b1: i32) -> i32 {
    (a1.min(b1) - a0.max(b0)).max(0)
}

/// Spatial relations from `a` to `b` under the default thresholds, or `None`
/// when `near` sits within rounding distance of its threshold.
pub fn oracle_spatial(a: &Rect, b: &Rect, screen: (u32, u32)) -> Option<BTreeSet<Predicate>> {
    let mut out = BTreeSet::new();
    let horiz = overlap(a.left, a.right, b.left, b.right);
    let vert = overlap(a.top, a.bottom, b.top, b.bottom);
    if horiz >= 1 && a.bottom <= b.top && a.top < b.top {
        out.insert(Predicate::Above);
    }
    if horiz >= 1 && b.bottom <= a.top && b.top < a.top {
        out.insert(Predicate::Below);
    }
    let mut gap = None;
    if vert >= 1 && a.right <= b.left && a.left < b.left {
        out.insert(Predicate::Left);
        gap = Some(b.left - a.right);
    }
    if vert >= 1 && b.right <= a.left && b.left < a.left {
        out.insert(Predicate::Right);
        gap = Some(a.left - b.right);
    }
    // Twice the center offsets are integers.
    let dx = (a.left + a.right - b.left - b.right) as f64;
    let dy = (a.top + a.bottom - b.top - b.bottom) as f64;
    let lhs = dx * dx + dy * dy;
    let rhs = 0.04 * ((screen.0 as f64).powi(2) + (screen.1 as f64).powi(2));
    if (lhs - rhs).abs() < 1e-6 * rhs {
        return None;
    }
    if lhs < rhs {
        out.insert(Predicate::Near);
    }
    if let Some(g) = gap {
        if g * 20 <= screen.0 as i32 {
            out.insert(Predicate::NextTo);
        }
    }
    Some(out)
}

/// Every triple of `snap`, recomputed pair by pair. `None` if a `near`
/// boundary case makes the expected set ambiguous.
pub fn oracle_triples(snap: &UiSnapshot) -> Option<TripleSet> {
    let mut out = TripleSet::new();
    let s = |v: &str| ObjectValue::String(v.to_string());
    for n in snap.nodes.values() {
        out.insert((n.id, Predicate::HasPackageName, s(&n.package_name)));
        out.insert((n.id, Predicate::HasClassName, s(&n.class_name)));
        out.insert((n.id, Predicate::HasScreenLocation, ObjectValue::Rect(n.bounds)));
        out.insert((n.id, Predicate::IsClickable, ObjectValue::Boolean(n.clickable)));
        out.insert((n.id, Predicate::IsEditable, ObjectValue::Boolean(n.editable)));
        out.insert((n.id, Predicate::IsScrollable, ObjectValue::Boolean(n.scrollable)));
        if let Some(t) = &n.text {
            out.insert((n.id, Predicate::HasText, s(t)));
            for (p, v) in parse_semantic(t) {
                out.insert((n.id, p, v));
            }
        }
        if let Some(d) = &n.content_description {
            out.insert((n.id, Predicate::HasContentDescription, s(d)));
        }
        if let Some(v) = &n.view_id {
            out.insert((n.id, Predicate::HasViewId, s(v)));
        }
    }
    for child in snap.nodes.values() {
        for parent in snap.nodes.values() {
            if child.parent != Some(parent.id) {
                continue;
            }
            out.insert((child.id, Predicate::HasParent, ObjectValue::Node(parent.id)));
            out.insert((parent.id, Predicate::HasChild, ObjectValue::Node(child.id)));
            if let Some(t) = &parent.text {
                out.insert((child.id, Predicate::HasParentText, s(t)));
            }
            if let Some(t) = &child.text {
                out.insert((parent.id, Predicate::HasChildText, s(t)));
            }
            if parent.scrollable {
                let idx = parent.children.iter().position(|c| *c == child.id).unwrap();
                out.insert((child.id, Predicate::HasListOrder, ObjectValue::number(idx as f64)));
            }
            for other in snap.nodes.values() {
                if other.id != child.id && other.parent == Some(parent.id) {
                    if let Some(t) = &other.text {
                        out.insert((child.id, Predicate::HasSiblingText, s(t)));
                    }
                }
            }
        }
    }
    for a in snap.nodes.values() {
        for b in snap.nodes.values() {
            if a.id == b.id {
                continue;
            }
            for p in oracle_spatial(&a.bounds, &b.bounds, (snap.screen_width, snap.screen_height))? {
                out.insert((a.id, p, ObjectValue::Node(b.id)));
            }
        }
    }
    Some(out)
}

pub fn graph_triples(g: &UiGraph) -> TripleSet {
    g.triples().iter().map(|t| (t.subject, t.predicate, t.object.clone())).collect()
}

const NUMERIC: &[Predicate] = &[
    Predicate::HasListOrder,
    Predicate::ContainsNumber,
    Predicate::ContainsMoney,
    Predicate::ContainsPercentage,
    Predicate::ContainsTemperature,
];

/// A random valid query whose literals mostly come from `g`'s own triples.
pub fn random_query(rng: &mut ChaCha8Rng, g: &UiGraph, depth: usize) -> QueryAst {
    let literal_triples: Vec<_> = g.triples().iter().filter(|t| !t.predicate.is_node_relation()).collect();
    loop {
        let q = gen_query(rng, g, &literal_triples, depth);
        if q.validate().is_ok() {
            return q;
        }
    }
}

fn gen_query(rng: &mut ChaCha8Rng, g: &UiGraph, lits: &[&uiq::relations::Triple], depth: usize) -> QueryAst {
    let choice = if depth <= 1 { 0 } else { rng.gen_range(0..6) };
    match choice {
        0 | 1 => {
            if rng.gen_bool(0.1) || lits.is_empty() {
                let odd = ["no such text", "say \"hi\"", "back\\slash", "( paren )", ""];
                return QueryAst::text(Predicate::HasText, *odd.choose(rng).unwrap());
            }
            let t = lits.choose(rng).unwrap();
            QueryAst::literal(t.predicate, Literal::from_object(&t.object).unwrap())
        }
        2 => {
            let p = *Predicate::ALL.iter().filter(|p| p.is_node_relation()).collect::<Vec<_>>().choose(rng).unwrap();
            QueryAst::join(*p, gen_query(rng, g, lits, depth - 1))
        }
        3 => {
            let k = rng.gen_range(2..=3);
            QueryAst::and((0..k).map(|_| gen_query(rng, g, lits, depth - 1)))
        }
        4 => {
            let k = rng.gen_range(2..=3);
            QueryAst::or((0..k).map(|_| gen_query(rng, g, lits, depth - 1)))
        }
        _ => {
            let p = *NUMERIC.choose(rng).unwrap();
            let inner = Box::new(gen_query(rng, g, lits, depth - 1));
            if rng.gen_bool(0.5) {
                QueryAst::ArgMax(p, inner)
            } else {
                QueryAst::ArgMin(p, inner)
            }
        }
    }
}

/// Decides membership node by node straight from the definition.
pub struct NaiveEvaluator<'a> {
    nodes: Vec<NodeId>,
    triples: &'a TripleSet,
    memo: HashMap<(usize, NodeId), bool>,
}

impl<'a> NaiveEvaluator<'a> {
    pub fn new(snap: &UiSnapshot, triples: &'a TripleSet) -> Self {
        NaiveEvaluator { nodes: snap.nodes.keys().copied().collect(), triples, memo: HashMap::new() }
    }

    pub fn eval(&mut self, q: &QueryAst) -> BTreeSet<NodeId> {
        self.nodes.clone().into_iter().filter(|&n| self.holds(n, q)).collect()
    }

    fn numbers(&self, n: NodeId, p: Predicate) -> Vec<f64> {
        self.triples
            .iter()
            .filter(|(s, pp, _)| *s == n && *pp == p)
            .filter_map(|(_, _, o)| match o {
                ObjectValue::Number(x) => Some(x.0),
                _ => None,
            })
            .collect()
    }

    fn holds(&mut self, n: NodeId, q: &QueryAst) -> bool {
        let key = (q as *const QueryAst as usize, n);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let v = match q {
            QueryAst::Entity(_) | QueryAst::Prev(_) => false,
            QueryAst::Join(p, inner) => match &**inner {
                QueryAst::Entity(lit) => match lit.object_for(*p) {
                    Some(obj) => self.triples.contains(&(n, *p, obj)),
                    None => false,
                },
                sub => {
                    let objects: Vec<NodeId> = self
                        .triples
                        .iter()
                        .filter(|(s, pp, _)| *s == n && pp == p)
                        .filter_map(|(_, _, o)| o.as_node())
                        .collect();
                    objects.into_iter().any(|m| self.holds(m, sub))
                }
            },
            QueryAst::And(ops) => ops.iter().all(|op| self.holds(n, op)),
            QueryAst::Or(ops) => ops.iter().any(|op| self.holds(n, op)),
            QueryAst::ArgMax(p, inner) | QueryAst::ArgMin(p, inner) => {
                let max = matches!(q, QueryAst::ArgMax(..));
                if !self.holds(n, inner) {
                    false
                } else {
                    let pick = |xs: Vec<f64>| -> Option<f64> {
                        xs.into_iter().fold(None, |acc, x| match acc {
                            None => Some(x),
                            Some(a) => Some(if max { a.max(x) } else { a.min(x) }),
                        })
                    };
                    match pick(self.numbers(n, *p)) {
                        None => false,
                        Some(mine) => {
                            let members: Vec<NodeId> =
                                self.nodes.clone().into_iter().filter(|&m| self.holds(m, inner)).collect();
                            members.into_iter().all(|m| match pick(self.numbers(m, *p)) {
                                None => true,
                                Some(v) => if max { v <= mine } else { v >= mine },
                            })
                        }
                    }
                }
            }
        };
        self.memo.insert(key, v);
        v
    }
}

/// Maximum one-to-one matching size by exhaustive search.
pub fn brute_force_matches(records: &[Observation], labels: &[GroundTruthLabel], window: i64) -> usize {
    fn go(i: usize, used: u32, recs: &[Observation], labels: &[GroundTruthLabel], w: i64, memo: &mut HashMap<(usize, u32), usize>) -> usize {
        if i == recs.len() {
            return 0;
        }
        if let Some(&v) = memo.get(&(i, used)) {
            return v;
        }
        let mut best = go(i + 1, used, recs, labels, w, memo);
        for (j, l) in labels.iter().enumerate() {
            let r = &recs[i];
            if used & (1 << j) == 0
                && l.expected_value == r.value
                && l.app_package == r.app_package
                && (l.timestamp - r.timestamp).abs() <= w
            {
                best = best.max(1 + go(i + 1, used | (1 << j), recs, labels, w, memo));
            }
        }
        memo.insert((i, used), best);
        best
    }
    assert!(labels.len() <= 31);
    go(0, 0, records, labels, window, &mut HashMap::new())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Writes `snap` as a hierarchy dump with nodes in pre-order.
pub fn to_xml(snap: &UiSnapshot) -> String {
    fn node(snap: &UiSnapshot, id: NodeId, depth: usize, out: &mut String) {
        let n = snap.node(id).unwrap();
        let b = n.bounds;
        let pad = "  ".repeat(depth);
        out.push_str(&format!(
            "{pad}<node index=\"0\" text=\"{}\" resource-id=\"{}\" class=\"{}\" package=\"{}\" content-desc=\"{}\" clickable=\"{}\" editable=\"{}\" scrollable=\"{}\" bounds=\"[{},{}][{},{}]\"",
            escape(n.text.as_deref().unwrap_or("")),
            escape(n.view_id.as_deref().unwrap_or("")),
            escape(&n.class_name),
            escape(&n.package_name),
            escape(n.content_description.as_deref().unwrap_or("")),
            n.clickable,
            n.editable,
            n.scrollable,
            b.left,
            b.top,
            b.right,
            b.bottom
        ));
        if n.children.is_empty() {
            out.push_str(" />\n");
        } else {
            out.push_str(">\n");
            for c in &n.children {
                node(snap, *c, depth + 1, out);
            }
            out.push_str(&format!("{pad}</node>\n"));
        }
    }
    let mut out = format!(
        "<?xml version='1.0' encoding='UTF-8' standalone='yes' ?>\n<hierarchy rotation=\"0\" snapshot-id=\"{}\" width=\"{}\" height=\"{}\">\n",
        escape(&snap.snapshot_id),
        snap.screen_width,
        snap.screen_height
    );
    node(snap, snap.root_id, 1, &mut out);
    out.push_str("</hierarchy>\n");
    out
}

/// An element from the reference XML reader.
#[derive(Debug, Clone, PartialEq)]
pub struct XmlElement {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<XmlElement>,
}

impl XmlElement {
    pub fn attr(&self, k: &str) -> Option<&str> {
        self.attrs.iter().find(|(a, _)| a == k).map(|(_, v)| v.as_str())
    }
}

/// Minimal recursive-descent reader: prolog, elements, attributes, the five
/// predefined entities and numeric references. Text content is ignored.
pub struct XmlReader<'a> {
    s: &'a [u8],
    i: usize,
}

impl<'a> XmlReader<'a> {
    pub fn parse(text: &'a str) -> Result<XmlElement, String> {
        let mut r = XmlReader { s: text.as_bytes(), i: 0 };
        r.skip_misc()?;
        let root = r.element()?;
        r.skip_misc()?;
        if r.i != r.s.len() {
            return Err(format!("trailing content at byte {}", r.i));
        }
        Ok(root)
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.i).copied()
    }

    fn starts(&self, p: &str) -> bool {
        self.s[self.i..].starts_with(p.as_bytes())
    }

    fn ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\n' | b'\r' | b'\t')) {
            self.i += 1;
        }
    }

    fn skip_misc(&mut self) -> Result<(), String> {
        loop {
            self.ws();
            if self.starts("<?") {
                self.skip_until("?>")?;
            } else if self.starts("<!--") {
                self.skip_until("-->")?;
            } else {
                return Ok(());
            }
        }
    }

    fn skip_until(&mut self, end: &str) -> Result<(), String> {
        while !self.starts(end) {
            if self.i >= self.s.len() {
                return Err(format!("missing {end}"));
            }
            self.i += 1;
        }
        self.i += end.len();
        Ok(())
    }

    fn name(&mut self) -> Result<String, String> {
        let start = self.i;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'-' || c == b'_' || c == b':' || c == b'.') {
            self.i += 1;
        }
        if start == self.i {
            return Err(format!("expected a name at byte {start}"));
        }
        Ok(String::from_utf8(self.s[start..self.i].to_vec()).unwrap())
    }

    fn expect(&mut self, c: u8) -> Result<(), String> {
        if self.peek() == Some(c) {
            self.i += 1;
            Ok(())
        } else {
            Err(format!("expected '{}' at byte {}", c as char, self.i))
        }
    }

    fn value(&mut self) -> Result<String, String> {
        let q = self.peek().filter(|c| *c == b'"' || *c == b'\'').ok_or("expected a quote")?;
        self.i += 1;
        let start = self.i;
        while self.peek() != Some(q) {
            if self.i >= self.s.len() {
                return Err("unterminated attribute".into());
            }
            self.i += 1;
        }
        let raw = std::str::from_utf8(&self.s[start..self.i]).unwrap().to_string();
        self.i += 1;
        decode(&raw)
    }

    fn element(&mut self) -> Result<XmlElement, String> {
        self.expect(b'<')?;
        let name = self.name()?;
        let mut attrs = Vec::new();
        loop {
            self.ws();
            match self.peek() {
                Some(b'/') => {
                    self.i += 1;
                    self.expect(b'>')?;
                    return Ok(XmlElement { name, attrs, children: Vec::new() });
                }
                Some(b'>') => {
                    self.i += 1;
                    break;
                }
                _ => {
                    let k = self.name()?;
                    self.ws();
                    self.expect(b'=')?;
                    self.ws();
                    attrs.push((k, self.value()?));
                }
            }
        }
        let mut children = Vec::new();
        loop {
            // Character data between elements is skipped.
            while self.peek().is_some_and(|c| c != b'<') {
                self.i += 1;
            }
            if self.starts("</") {
                self.i += 2;
                let close = self.name()?;
                if close != name {
                    return Err(format!("</{close}> closes <{name}>"));
                }
                self.ws();
                self.expect(b'>')?;
                return Ok(XmlElement { name, attrs, children });
            }
            if self.starts("<!--") {
                self.skip_until("-->")?;
                continue;
            }
            if self.peek().is_none() {
                return Err(format!("unclosed <{name}>"));
            }
            children.push(self.element()?);
        }
    }
}

fn decode(raw: &str) -> Result<String, String> {
    let mut out = String::new();
    let mut rest = raw;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let semi = rest[amp..].find(';').ok_or("unterminated entity")? + amp;
        let ent = &rest[amp + 1..semi];
        let c = match ent {
            "amp" => '&',
            "lt" => '<',
            "gt" => '>',
            "quot" => '"',
            "apos" => '\'',
            _ if ent.starts_with("#x") => char::from_u32(u32::from_str_radix(&ent[2..], 16).map_err(|e| e.to_string())?).ok_or("bad char")?,
            _ if ent.starts_with('#') => char::from_u32(ent[1..].parse().map_err(|e: std::num::ParseIntError| e.to_string())?).ok_or("bad char")?,
            _ => return Err(format!("unknown entity &{ent};")),
        };
        out.push(c);
        rest = &rest[semi + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Nodes as the reference reader sees them, in document order.
pub fn reference_nodes(root: &XmlElement) -> Vec<UiNode> {
    fn walk(e: &XmlElement, parent: Option<NodeId>, out: &mut Vec<UiNode>) {
        let id = NodeId(out.len() as u32);
        let nums: Vec<i32> = e
            .attr("bounds")
            .unwrap()
            .split(|c: char| !c.is_ascii_digit())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().unwrap())
            .collect();
        let opt = |k: &str| e.attr(k).filter(|v| !v.is_empty()).map(str::to_string);
        let mut n = UiNode::new(
            id,
            e.attr("package").unwrap_or(""),
            e.attr("class").unwrap_or(""),
            Rect::new(nums[0], nums[1], nums[2], nums[3]),
        );
        n.text = opt("text");
        n.content_description = opt("content-desc");
        n.view_id = opt("resource-id");
        n.clickable = e.attr("clickable") == Some("true");
        n.editable = e.attr("editable") == Some("true");
        n.scrollable = e.attr("scrollable") == Some("true");
        n.parent = parent;
        out.push(n);
        for c in e.children.iter().filter(|c| c.name == "node") {
            let cid = NodeId(out.len() as u32);
            out[id.0 as usize].children.push(cid);
            walk(c, Some(id), out);
        }
    }
    let mut out = Vec::new();
    let start = if root.name == "hierarchy" { &root.children[0] } else { root };
    walk(start, None, &mut out);
    out
}
