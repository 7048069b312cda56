//! The Graph Query language.
//!
//! Grammar (s-expressions):
//!
//! ```text
//! Q := S | T
//! S := (r E) | (join r E) | (conj S S+) | (and S S+) | (or S S+) | (prev S)
//! T := (ARG_MAX r S) | (ARG_MIN r S)
//! E := literal | S
//! ```
//!
//! Literals are double-quoted strings, bare identifiers (`android.widget.Button`),
//! decimal numbers, `true`/`false`, and rectangles `Rect[x1,y1][x2,y2]`.
//! Relation names match case-insensitively and accept upper-snake aliases.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::relations::{ObjectKind, ObjectValue, Predicate, Tier};
use crate::snapshot::Rect;

mod nl;
mod parse;

pub use nl::render_nl;
pub use parse::parse;

/// Literal entity appearing in the object position of a join.
#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Str(String),
    Num(f64),
    Bool(bool),
    Rect(Rect),
}

impl Literal {
    pub fn kind(&self) -> ObjectKind {
        match self {
            Literal::Str(_) => ObjectKind::String,
            Literal::Num(_) => ObjectKind::Number,
            Literal::Bool(_) => ObjectKind::Boolean,
            Literal::Rect(_) => ObjectKind::Rect,
        }
    }

    /// The triple object this literal denotes for `predicate`. A number
    /// literal on a string relation stands for its decimal rendering.
    pub fn object_for(&self, predicate: Predicate) -> Option<ObjectValue> {
        match (predicate.object_kind(), self) {
            (ObjectKind::String, Literal::Str(s)) => Some(ObjectValue::String(s.clone())),
            (ObjectKind::String, Literal::Num(n)) => Some(ObjectValue::String(format_number(*n))),
            (ObjectKind::Number, Literal::Num(n)) => Some(ObjectValue::number(*n)),
            (ObjectKind::Boolean, Literal::Bool(b)) => Some(ObjectValue::Boolean(*b)),
            (ObjectKind::Rect, Literal::Rect(r)) => Some(ObjectValue::Rect(*r)),
            _ => None,
        }
    }

    /// Whether the literal may stand in the object position of `predicate`.
    pub fn fits(&self, predicate: Predicate) -> bool {
        self.object_for(predicate).is_some()
    }

    pub fn from_object(value: &ObjectValue) -> Option<Literal> {
        match value {
            ObjectValue::Node(_) => None,
            ObjectValue::String(s) => Some(Literal::Str(s.clone())),
            ObjectValue::Number(n) => Some(Literal::Num(n.0)),
            ObjectValue::Boolean(b) => Some(Literal::Bool(*b)),
            ObjectValue::Rect(r) => Some(Literal::Rect(*r)),
        }
    }
}

pub(crate) fn format_number(n: f64) -> String {
    if n == 0.0 {
        "0".to_string()
    } else {
        format!("{n}")
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Literal::Num(n) => f.write_str(&format_number(*n)),
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Rect(r) => write!(f, "Rect{r}"),
        }
    }
}

/// Query expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum QueryAst {
    Entity(Literal),
    Join(Predicate, Box<QueryAst>),
    And(Vec<QueryAst>),
    Or(Vec<QueryAst>),
    Prev(Box<QueryAst>),
    ArgMax(Predicate, Box<QueryAst>),
    ArgMin(Predicate, Box<QueryAst>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AstError {
    #[error("a literal cannot stand alone as a query")]
    BareEntity,
    #[error("`{0}` relates elements and needs a sub-query, not a literal")]
    NodeRelationNeedsQuery(Predicate),
    #[error("`{0}` needs a literal object")]
    LiteralRelationNeedsLiteral(Predicate),
    #[error("literal {literal} does not fit `{predicate}`, which expects a {expected:?}")]
    KindMismatch { predicate: Predicate, literal: String, expected: ObjectKind },
    #[error("{0} needs at least two operands")]
    TooFewOperands(&'static str),
    #[error("{0} directly nested in {0}; flatten it")]
    NestedConnective(&'static str),
    #[error("aggregate over `{0}`, which is not numeric")]
    NonNumericAggregate(Predicate),
}

impl QueryAst {
    pub fn join(predicate: Predicate, inner: QueryAst) -> QueryAst {
        QueryAst::Join(predicate, Box::new(inner))
    }

    pub fn literal(predicate: Predicate, literal: Literal) -> QueryAst {
        QueryAst::Join(predicate, Box::new(QueryAst::Entity(literal)))
    }

    pub fn text(predicate: Predicate, value: impl Into<String>) -> QueryAst {
        QueryAst::literal(predicate, Literal::Str(value.into()))
    }

    /// Conjunction with nested conjunctions flattened; a single operand is returned as is.
    pub fn and(operands: impl IntoIterator<Item = QueryAst>) -> QueryAst {
        let mut flat = Vec::new();
        for op in operands {
            match op {
                QueryAst::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            QueryAst::And(flat)
        }
    }

    pub fn or(operands: impl IntoIterator<Item = QueryAst>) -> QueryAst {
        let mut flat = Vec::new();
        for op in operands {
            match op {
                QueryAst::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            QueryAst::Or(flat)
        }
    }

    /// Checks the structural rules the parser enforces.
    pub fn validate(&self) -> Result<(), AstError> {
        if let QueryAst::Entity(_) = self {
            return Err(AstError::BareEntity);
        }
        self.validate_inner()
    }

    fn validate_inner(&self) -> Result<(), AstError> {
        match self {
            QueryAst::Entity(_) => Err(AstError::BareEntity),
            QueryAst::Join(p, inner) => match (&**inner, p.is_node_relation()) {
                (QueryAst::Entity(_), true) => Err(AstError::NodeRelationNeedsQuery(*p)),
                (QueryAst::Entity(lit), false) => {
                    if lit.fits(*p) {
                        Ok(())
                    } else {
                        Err(AstError::KindMismatch { predicate: *p, literal: lit.to_string(), expected: p.object_kind() })
                    }
                }
                (_, false) => Err(AstError::LiteralRelationNeedsLiteral(*p)),
                (q, true) => q.validate_inner(),
            },
            QueryAst::And(ops) | QueryAst::Or(ops) => {
                let name = if matches!(self, QueryAst::And(_)) { "conj" } else { "or" };
                if ops.len() < 2 {
                    return Err(AstError::TooFewOperands(name));
                }
                for op in ops {
                    if std::mem::discriminant(op) == std::mem::discriminant(self) {
                        return Err(AstError::NestedConnective(name));
                    }
                    op.validate_inner()?;
                }
                Ok(())
            }
            QueryAst::Prev(inner) => inner.validate_inner(),
            QueryAst::ArgMax(p, inner) | QueryAst::ArgMin(p, inner) => {
                if p.object_kind() != ObjectKind::Number {
                    return Err(AstError::NonNumericAggregate(*p));
                }
                inner.validate_inner()
            }
        }
    }

    /// Every relation mentioned, in pre-order (joins and aggregates).
    pub fn predicates(&self) -> Vec<Predicate> {
        let mut out = Vec::new();
        self.walk(&mut |q| match q {
            QueryAst::Join(p, _) | QueryAst::ArgMax(p, _) | QueryAst::ArgMin(p, _) => out.push(*p),
            _ => {}
        });
        out
    }

    /// Number of join nodes.
    pub fn predicate_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |q| {
            if let QueryAst::Join(..) = q {
                n += 1
            }
        });
        n
    }

    /// Worst (lowest-priority) tier of any relation in the query.
    pub fn worst_tier(&self) -> Tier {
        self.predicates().into_iter().map(Predicate::tier).max().unwrap_or(Tier::Full)
    }

    pub fn contains_prev(&self) -> bool {
        let mut found = false;
        self.walk(&mut |q| found |= matches!(q, QueryAst::Prev(_)));
        found
    }

    pub fn depth(&self) -> usize {
        match self {
            QueryAst::Entity(_) => 0,
            QueryAst::Join(_, i) | QueryAst::Prev(i) | QueryAst::ArgMax(_, i) | QueryAst::ArgMin(_, i) => 1 + i.depth(),
            QueryAst::And(ops) | QueryAst::Or(ops) => 1 + ops.iter().map(QueryAst::depth).max().unwrap_or(0),
        }
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a QueryAst)) {
        f(self);
        match self {
            QueryAst::Entity(_) => {}
            QueryAst::Join(_, i) | QueryAst::Prev(i) | QueryAst::ArgMax(_, i) | QueryAst::ArgMin(_, i) => i.walk(f),
            QueryAst::And(ops) | QueryAst::Or(ops) => ops.iter().for_each(|o| o.walk(f)),
        }
    }

    /// Literal of a top-level `(hasPackageName "...")` conjunct, if any.
    pub fn top_level_package(&self) -> Option<&str> {
        let conjuncts: &[QueryAst] = match self {
            QueryAst::And(ops) => ops,
            other => std::slice::from_ref(other),
        };
        conjuncts.iter().find_map(|q| match q {
            QueryAst::Join(Predicate::HasPackageName, inner) => match &**inner {
                QueryAst::Entity(Literal::Str(s)) => Some(s.as_str()),
                _ => None,
            },
            _ => None,
        })
    }
}

impl fmt::Display for QueryAst {
    /// Canonical text: lowerCamel relations, quoted strings, single spaces.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryAst::Entity(lit) => write!(f, "{lit}"),
            QueryAst::Join(p, inner) => write!(f, "({p} {inner})"),
            QueryAst::And(ops) | QueryAst::Or(ops) => {
                f.write_str(if matches!(self, QueryAst::And(_)) { "(conj" } else { "(or" })?;
                for op in ops {
                    write!(f, " {op}")?;
                }
                f.write_str(")")
            }
            QueryAst::Prev(inner) => write!(f, "(prev {inner})"),
            QueryAst::ArgMax(p, inner) => write!(f, "(ARG_MAX {p} {inner})"),
            QueryAst::ArgMin(p, inner) => write!(f, "(ARG_MIN {p} {inner})"),
        }
    }
}

/// Canonical printed form.
pub fn print(ast: &QueryAst) -> String {
    ast.to_string()
}

/// A query plus the app package it is scoped to.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphQuery {
    pub root: QueryAst,
    pub source_package: Option<String>,
}

impl GraphQuery {
    pub fn new(root: QueryAst) -> Self {
        let source_package = root.top_level_package().map(str::to_string);
        GraphQuery { root, source_package }
    }

    pub fn parse(text: &str) -> Result<Self, QueryParseError> {
        parse(text).map(GraphQuery::new)
    }

    /// Synthesized queries always carry both context relations.
    pub fn has_context(&self) -> bool {
        let preds = self.root.predicates();
        preds.contains(&Predicate::HasPackageName) && preds.contains(&Predicate::HasClassName)
    }
}

impl fmt::Display for GraphQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ParseErrorKind {
    UnbalancedParens,
    UnexpectedToken,
    UnterminatedString,
    UnknownPredicate,
    Arity,
    NonNumericAggregate,
    KindMismatch,
    TrailingInput,
}

/// Parse failure with a 0-based character offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} (at position {position})")]
pub struct QueryParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
    pub message: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_join_prints() {
        let q = QueryAst::text(Predicate::HasText, "apple");
        assert_eq!(print(&q), r#"(hasText "apple")"#);
    }

    #[test]
    fn and_flattens() {
        let a = QueryAst::text(Predicate::HasText, "a");
        let b = QueryAst::text(Predicate::HasText, "b");
        let c = QueryAst::text(Predicate::HasText, "c");
        let q = QueryAst::and([QueryAst::and([a.clone(), b.clone()]), c.clone()]);
        assert_eq!(q, QueryAst::And(vec![a, b, c]));
        assert!(q.validate().is_ok());
    }

    #[test]
    fn validation_rules() {
        let lit = |l| QueryAst::Entity(l);
        assert_eq!(lit(Literal::Num(1.0)).validate(), Err(AstError::BareEntity));
        assert!(matches!(
            QueryAst::literal(Predicate::Above, Literal::Str("x".into())).validate(),
            Err(AstError::NodeRelationNeedsQuery(_))
        ));
        assert!(matches!(
            QueryAst::literal(Predicate::IsClickable, Literal::Str("x".into())).validate(),
            Err(AstError::KindMismatch { .. })
        ));
        assert!(QueryAst::literal(Predicate::HasText, Literal::Num(6.0)).validate().is_ok());
        let s = QueryAst::text(Predicate::HasText, "x");
        assert!(matches!(
            QueryAst::ArgMin(Predicate::HasText, Box::new(s.clone())).validate(),
            Err(AstError::NonNumericAggregate(_))
        ));
        assert!(QueryAst::ArgMin(Predicate::HasListOrder, Box::new(s.clone())).validate().is_ok());
        assert!(matches!(QueryAst::And(vec![s]).validate(), Err(AstError::TooFewOperands(_))));
    }

    #[test]
    fn number_literal_on_string_relation() {
        assert_eq!(
            Literal::Num(6.0).object_for(Predicate::HasText),
            Some(ObjectValue::String("6".into()))
        );
        assert_eq!(Literal::Num(-0.0).to_string(), "0");
    }

    #[test]
    fn graph_query_package() {
        let q = GraphQuery::parse(r#"(conj (hasPackageName "com.x") (hasClassName "C"))"#).unwrap();
        assert_eq!(q.source_package.as_deref(), Some("com.x"));
        assert!(q.has_context());
    }
}
