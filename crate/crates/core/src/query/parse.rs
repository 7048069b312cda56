use super::{Literal, ParseErrorKind, QueryAst, QueryParseError};
use crate::relations::{ObjectKind, Predicate};
use crate::snapshot::Rect;

const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Str(String),
    Atom(String),
}

fn err(kind: ParseErrorKind, position: usize, message: impl Into<String>) -> QueryParseError {
    QueryParseError { kind, position, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, QueryParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push((Tok::Open, i));
                i += 1;
            }
            ')' => {
                out.push((Tok::Close, i));
                i += 1;
            }
            '"' => {
                let start = i;
                i += 1;
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err(err(ParseErrorKind::UnterminatedString, start, "unterminated string literal")),
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some('\\') => {
                            match chars.get(i + 1) {
                                Some(e @ ('"' | '\\')) => s.push(*e),
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                Some(other) => {
                                    s.push('\\');
                                    s.push(*other);
                                }
                                None => {
                                    return Err(err(ParseErrorKind::UnterminatedString, start, "unterminated string literal"))
                                }
                            }
                            i += 2;
                        }
                        Some(c) => {
                            s.push(*c);
                            i += 1;
                        }
                    }
                }
                out.push((Tok::Str(s), start));
            }
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !matches!(chars[i], '(' | ')' | '"') {
                    i += 1;
                }
                out.push((Tok::Atom(chars[start..i].iter().collect()), start));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

/// Parses query text into an AST. Nested `conj`/`or` of the same kind are flattened.
pub fn parse(text: &str) -> Result<QueryAst, QueryParseError> {
    let toks = lex(text)?;
    let end = text.chars().count();
    let mut open = 0usize;
    for (tok, at) in &toks {
        match tok {
            Tok::Open => open += 1,
            Tok::Close if open == 0 => return Err(err(ParseErrorKind::UnbalancedParens, *at, "unmatched `)`")),
            Tok::Close => open -= 1,
            _ => {}
        }
    }
    if open > 0 {
        return Err(err(ParseErrorKind::UnbalancedParens, end, "unexpected end of input; missing `)`"));
    }
    let mut p = Parser { toks, pos: 0, end };
    match p.peek() {
        None => return Err(err(ParseErrorKind::UnexpectedToken, 0, "empty query")),
        Some((Tok::Open, _)) => {}
        Some((Tok::Close, at)) => return Err(err(ParseErrorKind::UnbalancedParens, at, "unexpected `)`")),
        Some((_, at)) => return Err(err(ParseErrorKind::UnexpectedToken, at, "a query starts with `(`")),
    }
    let ast = p.query(0)?;
    if let Some((tok, at)) = p.peek() {
        let kind = if tok == Tok::Close { ParseErrorKind::UnbalancedParens } else { ParseErrorKind::TrailingInput };
        return Err(err(kind, at, "unexpected input after the query"));
    }
    Ok(ast)
}

fn keyword(atom: &str) -> String {
    atom.chars().filter(|c| *c != '_').flat_map(char::to_lowercase).collect()
}

impl Parser {
    fn peek(&self) -> Option<(Tok, usize)> {
        self.toks.get(self.pos).cloned()
    }

    fn next(&mut self) -> Result<(Tok, usize), QueryParseError> {
        let t = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| err(ParseErrorKind::UnbalancedParens, self.end, "unexpected end of input; missing `)`"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_close(&mut self, what: &str) -> Result<(), QueryParseError> {
        match self.next()? {
            (Tok::Close, _) => Ok(()),
            (_, at) => Err(err(ParseErrorKind::Arity, at, format!("too many arguments to {what}"))),
        }
    }

    fn relation(&mut self) -> Result<(Predicate, usize), QueryParseError> {
        match self.next()? {
            (Tok::Atom(name), at) => Predicate::from_name(&name)
                .map(|p| (p, at))
                .ok_or_else(|| err(ParseErrorKind::UnknownPredicate, at, format!("unknown predicate `{name}`"))),
            (Tok::Close, at) => Err(err(ParseErrorKind::Arity, at, "missing relation")),
            (_, at) => Err(err(ParseErrorKind::UnexpectedToken, at, "expected a relation name")),
        }
    }

    fn query(&mut self, depth: usize) -> Result<QueryAst, QueryParseError> {
        let (open, open_at) = self.next()?;
        if open != Tok::Open {
            return Err(err(ParseErrorKind::UnexpectedToken, open_at, "expected `(`"));
        }
        if depth > MAX_DEPTH {
            return Err(err(ParseErrorKind::UnexpectedToken, open_at, "query nested too deeply"));
        }
        let (head, head_at) = self.next()?;
        let head = match head {
            Tok::Atom(a) => a,
            Tok::Close => return Err(err(ParseErrorKind::Arity, head_at, "empty expression `()`")),
            _ => return Err(err(ParseErrorKind::UnexpectedToken, head_at, "expected an operator or relation name")),
        };
        match keyword(&head).as_str() {
            "conj" | "and" | "or" => {
                let is_and = keyword(&head) != "or";
                let mut ops = Vec::new();
                while !matches!(self.peek(), Some((Tok::Close, _)) | None) {
                    ops.push(self.query(depth + 1)?);
                }
                self.next()?;
                if ops.len() < 2 {
                    return Err(err(ParseErrorKind::Arity, open_at, format!("`{head}` needs at least two operands")));
                }
                Ok(if is_and { QueryAst::and(ops) } else { QueryAst::or(ops) })
            }
            "prev" => {
                if matches!(self.peek(), Some((Tok::Close, _))) {
                    return Err(err(ParseErrorKind::Arity, open_at, "`prev` needs one operand"));
                }
                let inner = self.query(depth + 1)?;
                self.expect_close("prev")?;
                Ok(QueryAst::Prev(Box::new(inner)))
            }
            "argmax" | "argmin" => {
                let (rel, rel_at) = self.relation()?;
                if rel.object_kind() != ObjectKind::Number {
                    return Err(err(
                        ParseErrorKind::NonNumericAggregate,
                        rel_at,
                        format!("aggregate over non-numeric relation `{rel}`"),
                    ));
                }
                if matches!(self.peek(), Some((Tok::Close, _))) {
                    return Err(err(ParseErrorKind::Arity, open_at, format!("`{head}` needs a relation and a query")));
                }
                let inner = self.query(depth + 1)?;
                self.expect_close(&head)?;
                Ok(if keyword(&head) == "argmax" {
                    QueryAst::ArgMax(rel, Box::new(inner))
                } else {
                    QueryAst::ArgMin(rel, Box::new(inner))
                })
            }
            "join" => {
                let (rel, _) = self.relation()?;
                self.join_body(rel, open_at, depth)
            }
            _ => {
                let rel = Predicate::from_name(&head).ok_or_else(|| {
                    err(ParseErrorKind::UnknownPredicate, head_at, format!("unknown predicate `{head}`"))
                })?;
                self.join_body(rel, open_at, depth)
            }
        }
    }

    fn join_body(&mut self, rel: Predicate, open_at: usize, depth: usize) -> Result<QueryAst, QueryParseError> {
        let (tok, at) = self.peek().ok_or_else(|| err(ParseErrorKind::UnbalancedParens, self.end, "unexpected end of input"))?;
        let inner = match tok {
            Tok::Close => return Err(err(ParseErrorKind::Arity, open_at, format!("`{rel}` needs an object"))),
            Tok::Open => {
                if !rel.is_node_relation() {
                    return Err(err(ParseErrorKind::KindMismatch, at, format!("`{rel}` takes a literal, not a sub-query")));
                }
                self.query(depth + 1)?
            }
            Tok::Str(s) => {
                self.pos += 1;
                self.literal_for(rel, Literal::Str(s), at)?
            }
            Tok::Atom(a) => {
                self.pos += 1;
                self.literal_for(rel, classify_atom(&a, at)?, at)?
            }
        };
        self.expect_close(rel.name())?;
        Ok(QueryAst::join(rel, inner))
    }

    fn literal_for(&self, rel: Predicate, lit: Literal, at: usize) -> Result<QueryAst, QueryParseError> {
        if rel.is_node_relation() {
            return Err(err(ParseErrorKind::KindMismatch, at, format!("`{rel}` relates elements and needs a sub-query")));
        }
        if !lit.fits(rel) {
            return Err(err(
                ParseErrorKind::KindMismatch,
                at,
                format!("literal {lit} does not fit `{rel}` ({:?} expected)", rel.object_kind()),
            ));
        }
        Ok(QueryAst::Entity(lit))
    }
}

fn is_decimal(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    !int.is_empty()
        && int.bytes().all(|b| b.is_ascii_digit())
        && frac.is_none_or(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()))
}

fn classify_atom(atom: &str, at: usize) -> Result<Literal, QueryParseError> {
    if atom.eq_ignore_ascii_case("true") {
        return Ok(Literal::Bool(true));
    }
    if atom.eq_ignore_ascii_case("false") {
        return Ok(Literal::Bool(false));
    }
    if is_decimal(atom) {
        return atom
            .parse::<f64>()
            .map(Literal::Num)
            .map_err(|_| err(ParseErrorKind::UnexpectedToken, at, format!("bad number `{atom}`")));
    }
    if atom.len() >= 5 && atom[..5].eq_ignore_ascii_case("rect[") {
        return parse_rect(&atom[4..])
            .map(Literal::Rect)
            .ok_or_else(|| err(ParseErrorKind::UnexpectedToken, at, format!("bad rectangle `{atom}`; expected Rect[x1,y1][x2,y2]")));
    }
    Ok(Literal::Str(atom.to_string()))
}

fn parse_rect(s: &str) -> Option<Rect> {
    let inner = s.strip_prefix('[')?.strip_suffix(']')?;
    let (a, b) = inner.split_once("][")?;
    let pair = |p: &str| -> Option<(i32, i32)> {
        let (x, y) = p.split_once(',')?;
        Some((x.parse().ok()?, y.parse().ok()?))
    };
    let (l, t) = pair(a)?;
    let (r, bm) = pair(b)?;
    let rect = Rect::new(l, t, r, bm);
    rect.is_valid().then_some(rect)
}
