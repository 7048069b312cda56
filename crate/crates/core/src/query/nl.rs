//! Template-based English rendering of queries.
//!
//! Every construct maps to a fixed phrase; the table is in
//! `docs/nl-templates.md`. Package context is left out of the phrase unless
//! it is the only constraint.

use super::{format_number, Literal, QueryAst};
use crate::relations::Predicate;
use crate::snapshot::short_class_name;

pub fn render_nl(ast: &QueryAst) -> String {
    phrase(ast)
}

#[derive(Default)]
struct NounPhrase {
    head: Option<String>,
    modifiers: Vec<String>,
    package: Option<String>,
}

impl NounPhrase {
    fn collect(&mut self, ast: &QueryAst) {
        match ast {
            QueryAst::And(ops) => ops.iter().for_each(|op| self.collect(op)),
            QueryAst::Join(Predicate::HasClassName, inner) if matches!(**inner, QueryAst::Entity(_)) => {
                let QueryAst::Entity(lit) = &**inner else { unreachable!() };
                let short = short_class_name(&literal_text(lit)).to_string();
                if self.head.is_none() {
                    self.head = Some(short);
                } else {
                    self.modifiers.push(format!("of type {short}"));
                }
            }
            QueryAst::Join(Predicate::HasPackageName, inner) if matches!(**inner, QueryAst::Entity(_)) => {
                let QueryAst::Entity(lit) = &**inner else { unreachable!() };
                self.package.get_or_insert_with(|| literal_text(lit));
            }
            QueryAst::Join(p, inner) => match &**inner {
                QueryAst::Entity(lit) => self.modifiers.push(literal_modifier(*p, lit)),
                q => self.modifiers.push(format!("{} {}", relation_words(*p), phrase(q))),
            },
            other => self.modifiers.push(format!("that is {}", phrase(other))),
        }
    }

    fn render(self) -> String {
        let mut out = format!("the {}", self.head.as_deref().unwrap_or("element"));
        if !self.modifiers.is_empty() {
            out.push(' ');
            out.push_str(&self.modifiers.join(" and "));
        } else if let (None, Some(pkg)) = (&self.head, &self.package) {
            out.push_str(&format!(" in app '{pkg}'"));
        }
        out
    }
}

fn phrase(ast: &QueryAst) -> String {
    match ast {
        QueryAst::Entity(lit) => literal_text(lit),
        QueryAst::Join(..) | QueryAst::And(_) => {
            let mut np = NounPhrase::default();
            np.collect(ast);
            np.render()
        }
        QueryAst::Or(ops) => format!("either {}", ops.iter().map(phrase).collect::<Vec<_>>().join(" or ")),
        QueryAst::Prev(inner) => format!("{} on the previous screen", phrase(inner)),
        QueryAst::ArgMin(Predicate::HasListOrder, inner) => {
            format!("the first item in the list matching {}", phrase(inner))
        }
        QueryAst::ArgMax(Predicate::HasListOrder, inner) => {
            format!("the last item in the list matching {}", phrase(inner))
        }
        QueryAst::ArgMin(p, inner) => format!("the one with the smallest {} among {}", quantity_noun(*p), phrase(inner)),
        QueryAst::ArgMax(p, inner) => format!("the one with the largest {} among {}", quantity_noun(*p), phrase(inner)),
    }
}

fn literal_text(lit: &Literal) -> String {
    match lit {
        Literal::Str(s) => s.clone(),
        Literal::Num(n) => format_number(*n),
        Literal::Bool(b) => b.to_string(),
        Literal::Rect(r) => format!("({},{})", r.left, r.top),
    }
}

fn relation_words(p: Predicate) -> &'static str {
    match p {
        Predicate::Above => "above",
        Predicate::Below => "below",
        Predicate::Left => "to the left of",
        Predicate::Right => "to the right of",
        Predicate::Near => "near",
        Predicate::NextTo => "next to",
        Predicate::HasParent => "inside",
        Predicate::HasChild => "containing",
        other => other.name(),
    }
}

fn quantity_noun(p: Predicate) -> &'static str {
    match p {
        Predicate::ContainsMoney => "amount",
        Predicate::ContainsPercentage => "percentage",
        Predicate::ContainsTemperature => "temperature",
        Predicate::HasListOrder => "list position",
        _ => "number",
    }
}

fn ordinal(n: u64) -> String {
    let suffix = match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}

fn literal_modifier(p: Predicate, lit: &Literal) -> String {
    let v = literal_text(lit);
    let flag = |word: &str| match lit {
        Literal::Bool(false) => format!("that is not {word}"),
        _ => format!("that is {word}"),
    };
    match p {
        Predicate::HasText => format!("that says '{v}'"),
        Predicate::HasContentDescription => format!("labeled '{v}'"),
        Predicate::HasViewId => format!("with id '{v}'"),
        Predicate::HasScreenLocation => format!("at screen location {v}"),
        Predicate::IsClickable => flag("clickable"),
        Predicate::IsEditable => flag("editable"),
        Predicate::IsScrollable => flag("scrollable"),
        Predicate::ContainsMoney => format!("showing the amount {v}"),
        Predicate::ContainsDate => format!("showing the date {v}"),
        Predicate::ContainsTime => format!("showing the time {v}"),
        Predicate::ContainsPhoneNumber => format!("showing the phone number {v}"),
        Predicate::ContainsEmailAddress => format!("showing the email address {v}"),
        Predicate::ContainsNumber => format!("showing the number {v}"),
        Predicate::ContainsPercentage => format!("showing {v}%"),
        Predicate::ContainsTemperature => format!("showing the temperature {v}°"),
        Predicate::HasParentText => format!("inside an element that says '{v}'"),
        Predicate::HasChildText => format!("containing text '{v}'"),
        Predicate::HasSiblingText => format!("beside text '{v}'"),
        Predicate::HasListOrder => match lit {
            Literal::Num(n) if *n >= 0.0 && n.fract() == 0.0 => {
                format!("that is the {} item in the list", ordinal(*n as u64 + 1))
            }
            _ => format!("at list position {v}"),
        },
        Predicate::HasPackageName => format!("in app '{v}'"),
        Predicate::HasClassName => format!("of type {}", short_class_name(&v)),
        other => format!("{} {v}", other.name()),
    }
}
