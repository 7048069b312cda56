//! Query synthesis from one demonstrated element.
//!
//! Every candidate starts from the two context relations (package and class)
//! and adds one *locator*:
//!
//! * an anchor: a spatial or parent/child relation to a nearby element with
//!   stable text, itself identified by `(conj (hasText ..) (hasClassName ..))`;
//! * a relative's text (`hasParentText`, `hasChildText`, `hasSiblingText`);
//! * one of the element's own non-content attributes (content description when
//!   text is present, view id, list position);
//! * its fixed screen location together with its displayed value.
//!
//! When context plus locator still matches several elements, further atoms are
//! added in tier order, skipping any that do not shrink the match set. A
//! candidate is kept only if it matches exactly the target.
//!
//! The target's own displayed value (its text, or content description when it
//! has no text) scores as deprioritized: it is the datum being collected, so a
//! query that pins it does not carry over to other screens. Queries built on
//! the value alone are only offered when nothing else identifies the target.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::exec::{eval, verify_unique};
use super::EngineError;
use crate::query::{render_nl, GraphQuery, Literal, QueryAst};
use crate::relations::{Category, ObjectValue, Predicate, Tier, UiGraph};
use crate::snapshot::{NodeId, UiNode};

const MAX_ANCHORS: usize = 8;
const CONTROL_CLASSES: [&str; 8] =
    ["Button", "TextView", "ImageButton", "CheckBox", "RadioButton", "Switch", "ToggleButton", "Chip"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SynthesisConfig {
    pub max_candidates: usize,
    pub max_predicates_per_query: usize,
    /// Only elements whose centers lie within this many pixels may serve as anchors.
    pub anchor_search_radius: Option<f64>,
    /// Allow view-id and screen-location predicates (ranked last).
    pub allow_deprioritized: bool,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig { max_candidates: 5, max_predicates_per_query: 6, anchor_search_radius: None, allow_deprioritized: true }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.max_candidates == 0 {
            return Err(EngineError::InvalidConfig("maxCandidates must be at least 1".into()));
        }
        if self.max_predicates_per_query < 2 {
            return Err(EngineError::InvalidConfig("maxPredicatesPerQuery must allow the two context predicates".into()));
        }
        Ok(())
    }
}

/// How a candidate locates its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum LocatorFamily {
    Anchor,
    RelativeText,
    Attribute,
    Coordinate,
    Value,
}

/// Ranking key; the derived order is the ranking order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Score {
    pub worst_tier: Tier,
    pub predicate_count: usize,
    pub canonical_text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateQuery {
    pub query: GraphQuery,
    pub score: Score,
    pub nl: String,
    pub family: LocatorFamily,
}

impl CandidateQuery {
    pub fn text(&self) -> &str {
        &self.score.canonical_text
    }
}

/// Sorts by (worst tier, predicate count, canonical text).
pub fn rank(mut candidates: Vec<CandidateQuery>) -> Vec<CandidateQuery> {
    candidates.sort_by(|a, b| a.score.cmp(&b.score));
    candidates
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum AtomKind {
    Anchor,
    RelativeText,
    Attribute,
    Flag,
    Location,
    Value,
}

#[derive(Debug, Clone)]
struct Atom {
    ast: QueryAst,
    tier: Tier,
    kind: AtomKind,
    matches: BTreeSet<NodeId>,
    key: String,
}

impl Atom {
    fn new(graph: &UiGraph, ast: QueryAst, tier: Tier, kind: AtomKind) -> Self {
        let matches = eval(&ast, graph);
        let key = ast.to_string();
        Atom { ast, tier, kind, matches, key }
    }
}

fn is_stable_text(text: &str) -> bool {
    !text.trim().is_empty() && !text.chars().any(|c| c.is_ascii_digit()) && text.chars().count() <= 64
}

fn distance(a: &UiNode, b: &UiNode) -> f64 {
    let (ax, ay) = a.bounds.center();
    let (bx, by) = b.bounds.center();
    (ax - bx).hypot(ay - by)
}

/// Ranked candidate queries that each match exactly `target` on `graph`.
pub fn synthesize(graph: &UiGraph, target: NodeId, config: &SynthesisConfig) -> Result<Vec<CandidateQuery>, EngineError> {
    config.validate()?;
    let snapshot = graph.snapshot();
    let t = snapshot.node(target).ok_or(EngineError::UnknownNode(target))?;

    let context = vec![
        Atom::new(graph, QueryAst::text(Predicate::HasPackageName, t.package_name.clone()), Tier::Full, AtomKind::Attribute),
        Atom::new(graph, QueryAst::text(Predicate::HasClassName, t.class_name.clone()), Tier::Full, AtomKind::Attribute),
    ];

    let value_atom = match (&t.text, &t.content_description) {
        (Some(text), _) => Some(Atom::new(graph, QueryAst::text(Predicate::HasText, text.clone()), Tier::Deprioritized, AtomKind::Value)),
        (None, Some(desc)) => Some(Atom::new(
            graph,
            QueryAst::text(Predicate::HasContentDescription, desc.clone()),
            Tier::Deprioritized,
            AtomKind::Value,
        )),
        (None, None) => None,
    };

    let anchors = anchor_atoms(graph, t, config);
    let relative = relative_text_atoms(graph, t);
    let mut attributes = Vec::new();
    if t.text.is_some() {
        if let Some(desc) = &t.content_description {
            attributes.push(Atom::new(
                graph,
                QueryAst::text(Predicate::HasContentDescription, desc.clone()),
                Predicate::HasContentDescription.tier(),
                AtomKind::Attribute,
            ));
        }
    }
    for order in graph.objects(target, Predicate::HasListOrder).filter_map(ObjectValue::as_number) {
        attributes.push(Atom::new(
            graph,
            QueryAst::literal(Predicate::HasListOrder, Literal::Num(order)),
            Predicate::HasListOrder.tier(),
            AtomKind::Attribute,
        ));
    }
    if config.allow_deprioritized {
        if let Some(view_id) = &t.view_id {
            attributes.push(Atom::new(graph, QueryAst::text(Predicate::HasViewId, view_id.clone()), Tier::Deprioritized, AtomKind::Attribute));
        }
    }
    let flags: Vec<Atom> = [(Predicate::IsClickable, t.clickable), (Predicate::IsEditable, t.editable), (Predicate::IsScrollable, t.scrollable)]
        .into_iter()
        .filter(|(_, on)| *on)
        .map(|(p, _)| Atom::new(graph, QueryAst::literal(p, Literal::Bool(true)), p.tier(), AtomKind::Flag))
        .collect();

    // Refinements never use deprioritized atoms, the location, or the value.
    let mut pool: Vec<&Atom> = anchors
        .iter()
        .chain(&relative)
        .chain(&attributes)
        .chain(&flags)
        .filter(|a| a.tier != Tier::Deprioritized)
        .collect();
    pool.sort_by_key(|a| (a.tier, a.kind));

    let mut built: Vec<(Vec<&Atom>, LocatorFamily)> = Vec::new();
    let families = anchors
        .iter()
        .map(|a| (a, LocatorFamily::Anchor))
        .chain(relative.iter().map(|a| (a, LocatorFamily::RelativeText)))
        .chain(attributes.iter().map(|a| (a, LocatorFamily::Attribute)));
    for (locator, family) in families {
        let seed: Vec<&Atom> = context.iter().chain(std::iter::once(locator)).collect();
        if let Some(atoms) = refine(seed, &pool, target, config) {
            built.push((atoms, family));
        }
    }

    let location;
    if config.allow_deprioritized && snapshot.len() > 1 {
        location = Atom::new(
            graph,
            QueryAst::literal(Predicate::HasScreenLocation, Literal::Rect(t.bounds)),
            Tier::Deprioritized,
            AtomKind::Location,
        );
        let mut seed: Vec<&Atom> = context.iter().chain(std::iter::once(&location)).collect();
        seed.extend(value_atom.as_ref());
        if let Some(atoms) = refine(seed, &pool, target, config) {
            built.push((atoms, LocatorFamily::Coordinate));
        }
    }

    if built.is_empty() {
        let mut seed: Vec<&Atom> = context.iter().collect();
        seed.extend(value_atom.as_ref());
        if let Some(atoms) = refine(seed, &pool, target, config) {
            built.push((atoms, LocatorFamily::Value));
        }
    }

    let mut seen = BTreeSet::new();
    let mut candidates = Vec::new();
    for (atoms, family) in built {
        let key: BTreeSet<&str> = atoms.iter().map(|a| a.key.as_str()).collect();
        if !seen.insert(key) {
            continue;
        }
        let ast = QueryAst::and(atoms.iter().map(|a| a.ast.clone()));
        if !verify_unique(&ast, graph, target)? {
            continue;
        }
        let worst_tier = atoms.iter().map(|a| a.tier).max().unwrap_or(Tier::Full);
        let score = Score { worst_tier, predicate_count: ast.predicate_count(), canonical_text: ast.to_string() };
        let nl = render_nl(&ast);
        candidates.push(CandidateQuery { query: GraphQuery::new(ast), score, nl, family });
    }
    let mut ranked = rank(candidates);
    ranked.truncate(config.max_candidates);
    Ok(ranked)
}

/// Adds pool atoms (in order) that shrink the match set until only `target` is left.
fn refine<'a>(seed: Vec<&'a Atom>, pool: &[&'a Atom], target: NodeId, config: &SynthesisConfig) -> Option<Vec<&'a Atom>> {
    let count = |atoms: &[&Atom]| atoms.iter().map(|a| a.ast.predicate_count()).sum::<usize>();
    let mut matches: BTreeSet<NodeId> = seed[0].matches.clone();
    for a in &seed[1..] {
        matches.retain(|n| a.matches.contains(n));
    }
    let mut atoms = seed;
    for candidate in pool {
        if matches.len() <= 1 {
            break;
        }
        if atoms.iter().any(|a| a.key == candidate.key) {
            continue;
        }
        if count(&atoms) + candidate.ast.predicate_count() > config.max_predicates_per_query {
            continue;
        }
        let narrowed: BTreeSet<NodeId> = matches.intersection(&candidate.matches).copied().collect();
        if narrowed.len() < matches.len() && narrowed.contains(&target) {
            matches = narrowed;
            atoms.push(candidate);
        }
    }
    (matches.len() == 1 && matches.contains(&target) && count(&atoms) <= config.max_predicates_per_query).then_some(atoms)
}

fn anchor_atoms(graph: &UiGraph, t: &UiNode, config: &SynthesisConfig) -> Vec<Atom> {
    let snapshot = graph.snapshot();
    let mut eligible: Vec<&UiNode> = snapshot
        .nodes
        .values()
        .filter(|n| n.id != t.id)
        .filter(|n| n.text.as_deref().is_some_and(is_stable_text))
        .filter(|n| config.anchor_search_radius.is_none_or(|r| distance(t, n) <= r))
        .filter(|n| graph.triples_of(t.id).iter().any(|tr| tr.object == ObjectValue::Node(n.id)))
        .collect();
    eligible.sort_by(|a, b| {
        let control = |n: &UiNode| !CONTROL_CLASSES.contains(&n.short_class_name());
        control(a)
            .cmp(&control(b))
            .then(distance(t, a).total_cmp(&distance(t, b)))
            .then(a.id.cmp(&b.id))
    });

    let mut out = Vec::new();
    let mut used = 0;
    for anchor in eligible {
        if used == MAX_ANCHORS {
            break;
        }
        let expr = QueryAst::and([
            QueryAst::text(Predicate::HasText, anchor.text.clone().unwrap()),
            QueryAst::text(Predicate::HasClassName, anchor.class_name.clone()),
        ]);
        let found = eval(&expr, graph);
        if found.len() != 1 || !found.contains(&anchor.id) {
            continue;
        }
        used += 1;
        let anchor_obj = ObjectValue::Node(anchor.id);
        for tr in graph.triples_of(t.id) {
            let usable = tr.predicate.category() == Category::Spatial
                || matches!(tr.predicate, Predicate::HasParent | Predicate::HasChild);
            if usable && tr.object == anchor_obj {
                out.push(Atom::new(graph, QueryAst::join(tr.predicate, expr.clone()), tr.predicate.tier(), AtomKind::Anchor));
            }
        }
    }
    out
}

fn relative_text_atoms(graph: &UiGraph, t: &UiNode) -> Vec<Atom> {
    let mut out = Vec::new();
    for p in [Predicate::HasParentText, Predicate::HasChildText, Predicate::HasSiblingText] {
        let values: BTreeSet<&str> = graph
            .objects(t.id, p)
            .filter_map(|o| match o {
                ObjectValue::String(s) if is_stable_text(s) => Some(s.as_str()),
                _ => None,
            })
            .collect();
        for v in values {
            out.push(Atom::new(graph, QueryAst::text(p, v), p.tier(), AtomKind::RelativeText));
        }
    }
    out
}
