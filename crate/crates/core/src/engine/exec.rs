use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::query::QueryAst;
use crate::relations::{ObjectValue, UiGraph};
use crate::snapshot::NodeId;

/// Nodes a query denotes on one graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchSet {
    pub node_ids: BTreeSet<NodeId>,
    pub graph_ref: String,
}

impl MatchSet {
    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_exactly(&self, id: NodeId) -> bool {
        self.node_ids.len() == 1 && self.node_ids.contains(&id)
    }
}

/// Evaluates a query against an augmented snapshot.
///
/// `(r E)` denotes every subject with an `r` triple whose object is in the
/// denotation of `E`; `conj` intersects, `or` unions, and the aggregates keep
/// the members of their operand with the extreme numeric `r` object.
pub fn execute(ast: &QueryAst, graph: &UiGraph) -> Result<MatchSet, EngineError> {
    if ast.contains_prev() {
        return Err(EngineError::UnsupportedOperator("prev"));
    }
    ast.validate()?;
    Ok(MatchSet { node_ids: eval(ast, graph), graph_ref: graph.snapshot().snapshot_id.clone() })
}

/// `execute(ast, graph) == {target}`.
pub fn verify_unique(ast: &QueryAst, graph: &UiGraph, target: NodeId) -> Result<bool, EngineError> {
    Ok(execute(ast, graph)?.is_exactly(target))
}

pub(crate) fn eval(ast: &QueryAst, graph: &UiGraph) -> BTreeSet<NodeId> {
    match ast {
        // A bare literal denotes a value, never a node.
        QueryAst::Entity(_) => BTreeSet::new(),
        QueryAst::Join(p, inner) => match &**inner {
            QueryAst::Entity(lit) => match lit.object_for(*p) {
                Some(obj) => graph.subjects(*p, &obj).iter().copied().collect(),
                None => BTreeSet::new(),
            },
            q => {
                let mut out = BTreeSet::new();
                for o in eval(q, graph) {
                    out.extend(graph.subjects(*p, &ObjectValue::Node(o)).iter().copied());
                }
                out
            }
        },
        QueryAst::And(ops) => {
            let mut iter = ops.iter();
            let Some(first) = iter.next() else { return BTreeSet::new() };
            let mut acc = eval(first, graph);
            for op in iter {
                if acc.is_empty() {
                    break;
                }
                let next = eval(op, graph);
                acc.retain(|n| next.contains(n));
            }
            acc
        }
        QueryAst::Or(ops) => ops.iter().flat_map(|op| eval(op, graph)).collect(),
        QueryAst::Prev(_) => BTreeSet::new(),
        QueryAst::ArgMax(p, inner) | QueryAst::ArgMin(p, inner) => {
            let want_max = matches!(ast, QueryAst::ArgMax(..));
            let scored: Vec<(NodeId, f64)> = eval(inner, graph)
                .into_iter()
                .filter_map(|n| {
                    let values = graph.objects(n, *p).filter_map(ObjectValue::as_number);
                    let v = if want_max { values.reduce(f64::max) } else { values.reduce(f64::min) };
                    v.map(|v| (n, v))
                })
                .collect();
            let best = scored
                .iter()
                .map(|(_, v)| *v)
                .reduce(|a, b| if want_max { a.max(b) } else { a.min(b) });
            match best {
                Some(best) => scored.into_iter().filter(|(_, v)| *v == best).map(|(n, _)| n).collect(),
                None => BTreeSet::new(),
            }
        }
    }
}

/// Text pulled from a matched element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Extracted {
    pub value: String,
    pub has_content: bool,
}

/// The element's text, else its content description, else empty with `has_content = false`.
pub fn extract(node: NodeId, graph: &UiGraph) -> Result<Extracted, EngineError> {
    let n = graph.snapshot().node(node).ok_or(EngineError::UnknownNode(node))?;
    Ok(match n.text.as_ref().or(n.content_description.as_ref()) {
        Some(v) => Extracted { value: v.clone(), has_content: true },
        None => Extracted { value: String::new(), has_content: false },
    })
}
