//! Assertion ASTs for heap terms and extended heap terms.
//!
//! Concrete syntax:
//!
//! ```text
//! a |-> 5                      points-to heaplet
//! o.f1.f2 |-> x                field access path (left-associative)
//! x |-> (left: l, right: r)    record value, one edge per field
//! p * q                        heap conjunction
//! p || q                       heap disjunction
//! inv(p)                       inverse heap
//! emp  true  false             total constants
//! true(a) false(a) emp(a)      partial constants over object `a`
//! tree(l)                      abstract predicate call
//! !e   e && e   e | e          logical connectives
//! ```
//!
//! Binding strength, tightest first: `.`, `inv`, `*`, `||`, `!`, `&&`, `|`.

mod lexer;
mod parser;
mod print;

use serde::Serialize;

pub use lexer::{Span, Token, TokenKind};
pub use parser::{parse_heap, parse_term, Parser, SyntaxError};

/// Name of the anonymous placeholder value. Every occurrence denotes its own
/// unconstrained cell.
pub const PLACEHOLDER: &str = "_";

/// A stack variable or an object field access path.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Location {
    pub root: String,
    pub path: Vec<String>,
}

impl Location {
    pub fn var(root: impl Into<String>) -> Self {
        Location {
            root: root.into(),
            path: Vec::new(),
        }
    }

    pub fn field(root: impl Into<String>, field: impl Into<String>) -> Self {
        Location {
            root: root.into(),
            path: vec![field.into()],
        }
    }

    /// Parses a dotted path such as `o.f1.f2` without validating identifiers.
    pub fn from_dotted(text: &str) -> Self {
        let mut parts = text.split('.');
        let root = parts.next().unwrap_or_default().to_string();
        Location {
            root,
            path: parts.map(str::to_string).collect(),
        }
    }

    /// Appends one field access.
    pub fn dot(&self, field: impl Into<String>) -> Self {
        let mut path = self.path.clone();
        path.push(field.into());
        Location {
            root: self.root.clone(),
            path,
        }
    }

    /// The object part and last field of a path; `None` for plain variables.
    pub fn split_last(&self) -> Option<(Location, &str)> {
        let (last, init) = self.path.split_last()?;
        Some((
            Location {
                root: self.root.clone(),
                path: init.to_vec(),
            },
            last.as_str(),
        ))
    }

    pub fn is_var(&self) -> bool {
        self.path.is_empty()
    }

    /// Replaces the root with another path (`p.f` with `p := o.g` gives `o.g.f`).
    pub fn rebase(&self, root: &Location) -> Location {
        let mut path = root.path.clone();
        path.extend(self.path.iter().cloned());
        Location {
            root: root.root.clone(),
            path,
        }
    }
}

/// Right-hand side of a heaplet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Value {
    Lit(i64),
    Sym(Location),
    Nil,
    Record(Vec<(String, Value)>),
}

impl Value {
    pub fn sym(name: impl Into<String>) -> Self {
        Value::Sym(Location::var(name))
    }

    pub fn placeholder() -> Self {
        Value::sym(PLACEHOLDER)
    }

    pub fn is_placeholder(&self) -> bool {
        matches!(self, Value::Sym(loc) if loc.is_var() && loc.root == PLACEHOLDER)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Heaplet {
    pub loc: Location,
    pub val: Value,
}

impl Heaplet {
    pub fn new(loc: Location, val: Value) -> Self {
        Heaplet { loc, val }
    }

    /// `root |-> name` shorthand used throughout the tests.
    pub fn simple(root: &str, target: &str) -> Self {
        Heaplet::new(
            Location::from_dotted(root),
            Value::Sym(Location::from_dotted(target)),
        )
    }

    /// Splits a record heaplet into one heaplet per field; other heaplets
    /// are returned unchanged.
    pub fn expand(&self) -> Vec<Heaplet> {
        match &self.val {
            Value::Record(fields) => fields
                .iter()
                .flat_map(|(f, v)| Heaplet::new(self.loc.dot(f), v.clone()).expand())
                .collect(),
            _ => vec![self.clone()],
        }
    }

    /// Sort key of the canonical heaplet order: printed location, then
    /// printed value.
    pub fn sort_key(&self) -> (String, String) {
        (self.loc.to_string(), self.val.to_string())
    }
}

/// Predicate call argument.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum Arg {
    Value(Value),
    Term(HeapTerm),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PredCall {
    pub name: String,
    pub args: Vec<Arg>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum HeapTerm {
    Emp,
    TrueTotal,
    FalseTotal,
    TruePartial(String),
    FalsePartial(String),
    EmpPartial(String),
    PointsTo(Heaplet),
    Conj(Box<HeapTerm>, Box<HeapTerm>),
    Disj(Box<HeapTerm>, Box<HeapTerm>),
    Inv(Box<HeapTerm>),
    /// Abstract predicate call inside a spatial term; removed by unfolding.
    Call(PredCall),
}

impl HeapTerm {
    pub fn pt(loc: Location, val: Value) -> Self {
        HeapTerm::PointsTo(Heaplet::new(loc, val))
    }

    pub fn conj(l: HeapTerm, r: HeapTerm) -> Self {
        HeapTerm::Conj(Box::new(l), Box::new(r))
    }

    pub fn disj(l: HeapTerm, r: HeapTerm) -> Self {
        HeapTerm::Disj(Box::new(l), Box::new(r))
    }

    pub fn inv(t: HeapTerm) -> Self {
        HeapTerm::Inv(Box::new(t))
    }

    /// Left-associated `*` chain; `emp` for an empty iterator.
    pub fn conj_all<I: IntoIterator<Item = HeapTerm>>(items: I) -> Self {
        items
            .into_iter()
            .reduce(HeapTerm::conj)
            .unwrap_or(HeapTerm::Emp)
    }

    /// Left-associated `||` chain; `emp` for an empty iterator.
    pub fn disj_all<I: IntoIterator<Item = HeapTerm>>(items: I) -> Self {
        items
            .into_iter()
            .reduce(HeapTerm::disj)
            .unwrap_or(HeapTerm::Emp)
    }

    fn any(&self, pred: &impl Fn(&HeapTerm) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            HeapTerm::Conj(l, r) | HeapTerm::Disj(l, r) => l.any(pred) || r.any(pred),
            HeapTerm::Inv(t) => t.any(pred),
            HeapTerm::Call(call) => call.args.iter().any(|a| match a {
                Arg::Term(t) => t.any(pred),
                Arg::Value(_) => false,
            }),
            _ => false,
        }
    }

    pub fn has_inverse(&self) -> bool {
        self.any(&|t| matches!(t, HeapTerm::Inv(_)))
    }

    pub fn has_partial(&self) -> bool {
        self.any(&|t| {
            matches!(
                t,
                HeapTerm::TruePartial(_) | HeapTerm::FalsePartial(_) | HeapTerm::EmpPartial(_)
            )
        })
    }

    pub fn has_call(&self) -> bool {
        self.any(&|t| matches!(t, HeapTerm::Call(_)))
    }

    /// True when the term has no calls, no partial constants and no inverses.
    pub fn is_ground(&self) -> bool {
        !self.has_call() && !self.has_partial() && !self.has_inverse()
    }

    /// Number of heaplet leaves.
    pub fn heaplet_count(&self) -> usize {
        match self {
            HeapTerm::PointsTo(_) => 1,
            HeapTerm::Conj(l, r) | HeapTerm::Disj(l, r) => l.heaplet_count() + r.heaplet_count(),
            HeapTerm::Inv(t) => t.heaplet_count(),
            _ => 0,
        }
    }

    /// Re-associates every `*` and `||` chain to the left.
    pub fn reassociate(&self) -> HeapTerm {
        match self {
            HeapTerm::Conj(..) => {
                let mut items = Vec::new();
                self.flatten_conj(&mut items);
                HeapTerm::conj_all(items.into_iter().map(HeapTerm::reassociate))
            }
            HeapTerm::Disj(..) => {
                let mut items = Vec::new();
                self.flatten_disj(&mut items);
                HeapTerm::disj_all(items.into_iter().map(HeapTerm::reassociate))
            }
            HeapTerm::Inv(t) => HeapTerm::inv(t.reassociate()),
            other => other.clone(),
        }
    }

    /// Collects the operands of a maximal `*` chain.
    pub fn flatten_conj<'a>(&'a self, out: &mut Vec<&'a HeapTerm>) {
        match self {
            HeapTerm::Conj(l, r) => {
                l.flatten_conj(out);
                r.flatten_conj(out);
            }
            other => out.push(other),
        }
    }

    /// Collects the operands of a maximal `||` chain.
    pub fn flatten_disj<'a>(&'a self, out: &mut Vec<&'a HeapTerm>) {
        match self {
            HeapTerm::Disj(l, r) => {
                l.flatten_disj(out);
                r.flatten_disj(out);
            }
            other => out.push(other),
        }
    }
}

impl From<Heaplet> for HeapTerm {
    fn from(h: Heaplet) -> Self {
        HeapTerm::PointsTo(h)
    }
}

/// Extended heap terms: heap terms under logical connectives.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum ExtTerm {
    Heap(HeapTerm),
    Not(Box<ExtTerm>),
    And(Box<ExtTerm>, Box<ExtTerm>),
    Or(Box<ExtTerm>, Box<ExtTerm>),
}

impl ExtTerm {
    pub fn as_heap(&self) -> Option<&HeapTerm> {
        match self {
            ExtTerm::Heap(h) => Some(h),
            _ => None,
        }
    }

    pub fn into_heap(self) -> Option<HeapTerm> {
        match self {
            ExtTerm::Heap(h) => Some(h),
            _ => None,
        }
    }

    /// Every predicate call in the term, in textual order.
    pub fn calls(&self) -> Vec<&PredCall> {
        fn heap<'a>(t: &'a HeapTerm, out: &mut Vec<&'a PredCall>) {
            match t {
                HeapTerm::Conj(l, r) | HeapTerm::Disj(l, r) => {
                    heap(l, out);
                    heap(r, out);
                }
                HeapTerm::Inv(t) => heap(t, out),
                HeapTerm::Call(c) => {
                    out.push(c);
                    for a in &c.args {
                        if let Arg::Term(t) = a {
                            heap(t, out);
                        }
                    }
                }
                _ => {}
            }
        }
        fn ext<'a>(t: &'a ExtTerm, out: &mut Vec<&'a PredCall>) {
            match t {
                ExtTerm::Heap(h) => heap(h, out),
                ExtTerm::Not(e) => ext(e, out),
                ExtTerm::And(l, r) | ExtTerm::Or(l, r) => {
                    ext(l, out);
                    ext(r, out);
                }
            }
        }
        let mut out = Vec::new();
        ext(self, &mut out);
        out
    }
}

impl From<HeapTerm> for ExtTerm {
    fn from(h: HeapTerm) -> Self {
        ExtTerm::Heap(h)
    }
}

/// Renders a term in canonical concrete syntax with minimal parentheses.
pub fn print_term(t: &ExtTerm) -> String {
    t.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_expansion_gives_one_heaplet_per_field() {
        let h = Heaplet::new(
            Location::var("x"),
            Value::Record(vec![
                ("left".into(), Value::sym("l")),
                ("right".into(), Value::Nil),
            ]),
        );
        let parts = h.expand();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].loc, Location::field("x", "left"));
        assert_eq!(parts[1].val, Value::Nil);
    }

    #[test]
    fn rebase_concatenates_paths() {
        let body = Location::from_dotted("p.f");
        let arg = Location::from_dotted("o.g");
        assert_eq!(body.rebase(&arg), Location::from_dotted("o.g.f"));
    }

    #[test]
    fn reassociate_left_nests_chains() {
        let a = HeapTerm::from(Heaplet::simple("a", "b"));
        let b = HeapTerm::from(Heaplet::simple("b", "c"));
        let c = HeapTerm::from(Heaplet::simple("c", "d"));
        let right = HeapTerm::conj(a.clone(), HeapTerm::conj(b.clone(), c.clone()));
        let left = HeapTerm::conj(HeapTerm::conj(a, b), c);
        assert_eq!(right.reassociate(), left);
    }
}
