//! Query text: `Q(A) = sum[C] sum[B] R(A,B), S(B,C) @ semiring=int`.
//!
//! ```text
//! query := head '=' agg* body ('@' 'semiring' '=' NAME)?
//! head  := NAME '(' attrs ')'
//! agg   := OPNAME '[' ATTR ']'
//! body  := atom (',' atom)*
//! atom  := NAME '(' attrs ')'
//! ```
//!
//! `//` starts a comment that runs to the end of the line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use ajar::{AggOp, AggregationOrdering, Attr, AttrSet, Edge, Hypergraph};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub relation: String,
    pub attrs: Vec<Attr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub name: String,
    pub head: Vec<Attr>,
    pub ordering: AggregationOrdering,
    pub body: Vec<Atom>,
    pub semiring: Option<String>,
}

impl Query {
    /// Edge names are relation names, suffixed `:i` (1-based) when a
    /// relation occurs in more than one atom.
    pub fn edge_names(&self) -> Vec<String> {
        let mut count: BTreeMap<&str, usize> = BTreeMap::new();
        for a in &self.body {
            *count.entry(&a.relation).or_default() += 1;
        }
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        self.body
            .iter()
            .map(|a| {
                if count[a.relation.as_str()] == 1 {
                    a.relation.clone()
                } else {
                    let i = seen.entry(&a.relation).or_default();
                    *i += 1;
                    format!("{}:{}", a.relation, i)
                }
            })
            .collect()
    }

    pub fn hypergraph(&self) -> Hypergraph {
        let edges = self
            .edge_names()
            .iter()
            .zip(&self.body)
            .map(|(n, a)| Edge::new(n, a.attrs.clone()).expect("atom attributes checked at parse time"))
            .collect();
        Hypergraph::new(edges)
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |xs: &[Attr]| xs.iter().map(|a| a.as_str()).collect::<Vec<_>>().join(",");
        write!(f, "{}({}) =", self.name, list(&self.head))?;
        for (a, op) in self.ordering.items() {
            write!(f, " {op}[{a}]")?;
        }
        for (i, atom) in self.body.iter().enumerate() {
            let sep = if i == 0 { " " } else { ", " };
            write!(f, "{sep}{}({})", atom.relation, list(&atom.attrs))?;
        }
        if let Some(s) = &self.semiring {
            write!(f, " @ semiring={s}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    Punct(char),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn lex(text: &str) -> Result<(Vec<Spanned>, (usize, usize)), ParseError> {
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        if c == '\n' {
            chars.next();
            line += 1;
            column = 1;
        } else if c.is_whitespace() {
            chars.next();
            column += 1;
        } else if c == '/' {
            chars.next();
            if chars.peek() != Some(&'/') {
                return Err(ParseError { line: l, column: col, message: "unexpected `/`".into() });
            }
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
        } else if is_name_start(c) || c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !is_name_char(c) {
                    break;
                }
                s.push(c);
                chars.next();
                column += 1;
            }
            out.push(Spanned { tok: Tok::Name(s), line: l, column: col });
        } else if "()[],=@".contains(c) {
            chars.next();
            column += 1;
            out.push(Spanned { tok: Tok::Punct(c), line: l, column: col });
        } else {
            return Err(ParseError { line: l, column: col, message: format!("unexpected character {c:?}") });
        }
    }
    Ok((out, (line, column)))
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.column)).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, column) = self.here();
        Err(ParseError { line, column, message: message.into() })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Some(Tok::Name(n)) => format!("`{n}`"),
            Some(Tok::Punct(c)) => format!("`{c}`"),
            None => "end of input".into(),
        }
    }

    fn name(&mut self, what: &str) -> Result<(String, (usize, usize)), ParseError> {
        let at = self.here();
        match self.peek() {
            Some(Tok::Name(n)) => {
                let n = n.clone();
                self.pos += 1;
                Ok((n, at))
            }
            _ => self.err(format!("expected {what}, found {}", self.describe())),
        }
    }

    fn punct(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{c}`, found {}", self.describe()))
        }
    }

    /// `'(' (NAME (',' NAME)*)? ')'`, names distinct.
    fn attrs(&mut self) -> Result<Vec<Attr>, ParseError> {
        self.punct('(')?;
        let mut out: Vec<Attr> = Vec::new();
        if self.peek() == Some(&Tok::Punct(')')) {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            let (n, (line, column)) = self.name("an attribute name")?;
            let a = Attr::new(&n);
            if out.contains(&a) {
                return Err(ParseError { line, column, message: format!("attribute {n} repeated") });
            }
            out.push(a);
            match self.peek() {
                Some(Tok::Punct(',')) => self.pos += 1,
                Some(Tok::Punct(')')) => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return self.err(format!("expected `,` or `)`, found {}", self.describe())),
            }
        }
    }
}

/// Parse one query. Checks the grammar, that aggregated attributes are
/// distinct and occur in the body, and that the head lists exactly the
/// remaining body attributes. Operator names are checked later against the
/// chosen semiring.
pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let (toks, end) = lex(text)?;
    let mut p = Parser { toks, pos: 0, end };
    let (name, _) = p.name("a query name")?;
    let head_at = p.here();
    let head = p.attrs()?;
    p.punct('=')?;

    let mut items: Vec<(Attr, AggOp, (usize, usize))> = Vec::new();
    while matches!(p.peek(), Some(Tok::Name(_))) && p.peek2() == Some(&Tok::Punct('[')) {
        let (op, _) = p.name("an operator")?;
        p.punct('[')?;
        let (a, at) = p.name("an attribute name")?;
        p.punct(']')?;
        let a = Attr::new(&a);
        if items.iter().any(|(b, _, _)| *b == a) {
            return Err(ParseError { line: at.0, column: at.1, message: format!("attribute {a} aggregated twice") });
        }
        items.push((a, AggOp::named(&op), at));
    }

    let mut body = Vec::new();
    loop {
        let (relation, _) = p.name("a relation name")?;
        let attrs = p.attrs()?;
        body.push(Atom { relation, attrs });
        if p.peek() == Some(&Tok::Punct(',')) {
            p.pos += 1;
        } else {
            break;
        }
    }

    let mut semiring = None;
    if p.peek() == Some(&Tok::Punct('@')) {
        p.pos += 1;
        let (kw, at) = p.name("`semiring`")?;
        if kw != "semiring" {
            return Err(ParseError { line: at.0, column: at.1, message: format!("expected `semiring`, found `{kw}`") });
        }
        p.punct('=')?;
        semiring = Some(p.name("a semiring name")?.0);
    }
    if p.peek().is_some() {
        return p.err(format!("unexpected {} after the query", p.describe()));
    }

    let in_body: AttrSet = body.iter().flat_map(|a| a.attrs.iter().cloned()).collect();
    for (a, _, at) in &items {
        if !in_body.contains(a) {
            return Err(ParseError { line: at.0, column: at.1, message: format!("aggregated attribute {a} is not in the body") });
        }
        if head.contains(a) {
            return Err(ParseError { line: at.0, column: at.1, message: format!("attribute {a} is both output and aggregated") });
        }
    }
    let aggregated: AttrSet = items.iter().map(|(a, _, _)| a.clone()).collect();
    let expected: BTreeSet<&Attr> = in_body.difference(&aggregated).collect();
    let got: BTreeSet<&Attr> = head.iter().collect();
    if expected != got {
        let show = |s: &BTreeSet<&Attr>| s.iter().map(|a| a.as_str()).collect::<Vec<_>>().join(",");
        return Err(ParseError {
            line: head_at.0,
            column: head_at.1,
            message: format!("head must list the non-aggregated attributes ({}), found ({})", show(&expected), show(&got)),
        });
    }
    let ordering = AggregationOrdering::new(items.into_iter().map(|(a, o, _)| (a, o)).collect())
        .map_err(|e| ParseError { line: 1, column: 1, message: e.to_string() })?;
    Ok(Query { name, head, ordering, body, semiring })
}

/// Parse a bare aggregation list such as `sum[C] max[A]`.
pub fn parse_ordering(text: &str) -> Result<AggregationOrdering, ParseError> {
    let (toks, end) = lex(text)?;
    let mut p = Parser { toks, pos: 0, end };
    let mut items = Vec::new();
    while p.peek().is_some() {
        let (op, _) = p.name("an operator")?;
        p.punct('[')?;
        let (a, _) = p.name("an attribute name")?;
        p.punct(']')?;
        items.push((Attr::new(&a), AggOp::named(&op)));
    }
    AggregationOrdering::new(items).map_err(|e| ParseError { line: 1, column: 1, message: e.to_string() })
}
