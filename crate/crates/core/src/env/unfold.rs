use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{Env, EnvError};
use crate::algebra::{detect_repetition, Witness};
use crate::term::{Arg, ExtTerm, HeapTerm, Heaplet, Location, PredCall, Value};

/// One active predicate call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Frame {
    pub predicate: String,
    pub args: Vec<String>,
}

/// Unfolding state threaded left to right through a `*`-scope.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ScopeState {
    /// Fields already specified per object.
    pub specified: BTreeMap<String, BTreeSet<String>>,
    /// Fields written explicitly in the enclosing `*`-chain of the current
    /// predicate level, including those to the right.
    pub explicit: BTreeMap<String, BTreeSet<String>>,
    pub stack: Vec<Frame>,
}

impl ScopeState {
    fn mark(&mut self, obj: &str, field: &str) {
        self.specified
            .entry(obj.to_string())
            .or_default()
            .insert(field.to_string());
    }

    fn is_taken(&self, obj: &str, field: &str) -> bool {
        let has = |m: &BTreeMap<String, BTreeSet<String>>| {
            m.get(obj).is_some_and(|fs| fs.contains(field))
        };
        has(&self.specified) || has(&self.explicit)
    }

    fn merge(&mut self, other: &ScopeState) {
        for (obj, fields) in &other.specified {
            self.specified
                .entry(obj.clone())
                .or_default()
                .extend(fields.iter().cloned());
        }
    }
}

/// Ground alternatives produced by unfolding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Unfolding {
    pub alternatives: Vec<HeapTerm>,
    /// Some call produced no alternative within the bound.
    pub exhausted: bool,
    pub notices: Vec<String>,
}

#[derive(Clone)]
enum Binding {
    Loc(Location),
    Val(Value),
    Term(HeapTerm),
}

struct Subst<'a> {
    pred: &'a str,
    map: BTreeMap<String, Binding>,
}

impl Subst<'_> {
    fn bad(&self, arg: &str, role: &'static str) -> EnvError {
        EnvError::BadArgument {
            pred: self.pred.to_string(),
            arg: arg.to_string(),
            role,
        }
    }

    fn loc(&self, l: &Location) -> Result<Location, EnvError> {
        match self.map.get(&l.root) {
            None => Ok(l.clone()),
            Some(Binding::Loc(base)) => Ok(l.rebase(base)),
            Some(_) => Err(self.bad(&l.root, "a location")),
        }
    }

    fn value(&self, v: &Value) -> Result<Value, EnvError> {
        match v {
            Value::Sym(l) => match self.map.get(&l.root) {
                Some(Binding::Val(x)) if l.is_var() => Ok(x.clone()),
                _ => Ok(Value::Sym(self.loc(l)?)),
            },
            Value::Record(fields) => Ok(Value::Record(
                fields
                    .iter()
                    .map(|(f, v)| Ok((f.clone(), self.value(v)?)))
                    .collect::<Result<_, EnvError>>()?,
            )),
            other => Ok(other.clone()),
        }
    }

    fn object(&self, o: &str) -> Result<String, EnvError> {
        match self.map.get(o) {
            None => Ok(o.to_string()),
            Some(Binding::Loc(l)) if l.is_var() => Ok(l.root.clone()),
            Some(_) => Err(self.bad(o, "an object name")),
        }
    }

    fn term(&self, t: &HeapTerm) -> Result<HeapTerm, EnvError> {
        Ok(match t {
            HeapTerm::PointsTo(h) => {
                if h.loc.is_var() && h.val.is_placeholder() {
                    if let Some(Binding::Term(bound)) = self.map.get(&h.loc.root) {
                        return Ok(bound.clone());
                    }
                }
                HeapTerm::PointsTo(Heaplet::new(self.loc(&h.loc)?, self.value(&h.val)?))
            }
            HeapTerm::Conj(l, r) => HeapTerm::conj(self.term(l)?, self.term(r)?),
            HeapTerm::Disj(l, r) => HeapTerm::disj(self.term(l)?, self.term(r)?),
            HeapTerm::Inv(x) => HeapTerm::inv(self.term(x)?),
            HeapTerm::TruePartial(o) => HeapTerm::TruePartial(self.object(o)?),
            HeapTerm::FalsePartial(o) => HeapTerm::FalsePartial(self.object(o)?),
            HeapTerm::EmpPartial(o) => HeapTerm::EmpPartial(self.object(o)?),
            HeapTerm::Call(c) => HeapTerm::Call(PredCall {
                name: c.name.clone(),
                args: c
                    .args
                    .iter()
                    .map(|a| match a {
                        Arg::Value(Value::Sym(l)) if l.is_var() => match self.map.get(&l.root) {
                            Some(Binding::Term(t)) => Ok(Arg::Term(t.clone())),
                            _ => Ok(Arg::Value(self.value(&Value::Sym(l.clone()))?)),
                        },
                        Arg::Value(v) => Ok(Arg::Value(self.value(v)?)),
                        Arg::Term(t) => Ok(Arg::Term(self.term(t)?)),
                    })
                    .collect::<Result<_, EnvError>>()?,
            }),
            other => other.clone(),
        })
    }
}

struct Unfolder<'a> {
    env: &'a Env,
    bound: usize,
    expand_calls: bool,
    fresh: usize,
    exhausted: bool,
    notices: Vec<String>,
}

type Alts = Vec<(HeapTerm, ScopeState)>;

/// Fields written directly by the operands of a `*`-chain.
fn chain_fields(ops: &[&HeapTerm]) -> Vec<(String, String)> {
    ops.iter()
        .filter_map(|t| match t {
            HeapTerm::PointsTo(h) => Some(h.expand()),
            _ => None,
        })
        .flatten()
        .filter(|h| h.loc.path.len() == 1)
        .map(|h| (h.loc.root.clone(), h.loc.path[0].clone()))
        .collect()
}

impl Unfolder<'_> {
    fn walk(&mut self, t: &HeapTerm, st: ScopeState) -> Result<Alts, EnvError> {
        match t {
            HeapTerm::Conj(..) => {
                let mut ops = Vec::new();
                t.flatten_conj(&mut ops);
                let outer = st.explicit.clone();
                let mut inner = st;
                for (obj, f) in chain_fields(&ops) {
                    inner.explicit.entry(obj).or_default().insert(f);
                }
                let mut partial: Vec<(Vec<HeapTerm>, ScopeState)> = vec![(Vec::new(), inner)];
                for op in ops {
                    let mut next = Vec::new();
                    for (parts, s) in partial {
                        for (t, s2) in self.walk(op, s)? {
                            let mut p = parts.clone();
                            p.push(t);
                            next.push((p, s2));
                        }
                    }
                    partial = next;
                }
                Ok(partial
                    .into_iter()
                    .map(|(parts, mut s)| {
                        s.explicit = outer.clone();
                        (HeapTerm::conj_all(parts), s)
                    })
                    .collect())
            }
            HeapTerm::Disj(l, r) => {
                let ls = self.walk(l, st.clone())?;
                let rs = self.walk(r, st.clone())?;
                let mut out = Vec::new();
                for (lt, ls) in &ls {
                    for (rt, rs) in &rs {
                        let mut s = ls.clone();
                        s.merge(rs);
                        out.push((HeapTerm::disj(lt.clone(), rt.clone()), s));
                    }
                }
                Ok(out)
            }
            HeapTerm::Inv(x) => Ok(self
                .walk(x, st)?
                .into_iter()
                .map(|(t, s)| (HeapTerm::inv(t), s))
                .collect()),
            HeapTerm::PointsTo(h) => {
                let mut st = st;
                for part in h.expand() {
                    if let Some((obj, f)) = part.loc.split_last() {
                        if obj.is_var() {
                            st.mark(&obj.root, f);
                        }
                    }
                }
                Ok(vec![(t.clone(), st)])
            }
            HeapTerm::TruePartial(o) => {
                let fields = self.env.fields_of(o)?;
                let mut st = st;
                let remaining: Vec<String> = fields
                    .iter()
                    .filter(|f| !st.is_taken(o, f))
                    .cloned()
                    .collect();
                for f in &remaining {
                    st.mark(o, f);
                }
                let parts = remaining.iter().map(|f| {
                    HeapTerm::pt(Location::field(o.clone(), f.clone()), Value::placeholder())
                });
                Ok(vec![(HeapTerm::conj_all(parts), st)])
            }
            HeapTerm::FalsePartial(o) => {
                self.env.fields_of(o)?;
                Ok(vec![(HeapTerm::FalseTotal, st)])
            }
            HeapTerm::EmpPartial(o) => {
                self.env.fields_of(o)?;
                Ok(vec![(HeapTerm::Emp, st)])
            }
            HeapTerm::Call(call) if self.expand_calls => self.call(call, st),
            _ => Ok(vec![(t.clone(), st)]),
        }
    }

    fn call(&mut self, call: &PredCall, st: ScopeState) -> Result<Alts, EnvError> {
        let def = self.env.predicate(call)?;
        let remaining = self.bound.saturating_sub(st.stack.len());
        let frame = Frame {
            predicate: call.name.clone(),
            args: call
                .args
                .iter()
                .map(|a| match a {
                    Arg::Value(v) => v.to_string(),
                    Arg::Term(t) => t.to_string(),
                })
                .collect(),
        };
        let mut out = Vec::new();
        let mut skipped = false;
        for clause in &def.clauses {
            if remaining == 0 && clause.body.has_call() {
                skipped = true;
                continue;
            }
            let mut map: BTreeMap<String, Binding> = def
                .params
                .iter()
                .zip(&call.args)
                .map(|(p, a)| {
                    let b = match a {
                        Arg::Value(Value::Sym(l)) => Binding::Loc(l.clone()),
                        Arg::Value(v) => Binding::Val(v.clone()),
                        Arg::Term(t) => Binding::Term(t.clone()),
                    };
                    (p.clone(), b)
                })
                .collect();
            for x in &clause.exists {
                self.fresh += 1;
                map.insert(
                    x.clone(),
                    Binding::Loc(Location::var(format!("{x}#{}", self.fresh))),
                );
            }
            let body = Subst {
                pred: &def.name,
                map,
            }
            .term(&clause.body)?;
            let mut inner = st.clone();
            inner.explicit.clear();
            inner.stack.push(frame.clone());
            for (t, mut s) in self.walk(&body, inner)? {
                s.explicit = st.explicit.clone();
                s.stack = st.stack.clone();
                out.push((t, s));
            }
        }
        if skipped {
            self.notices.push(format!(
                "recursive clauses of `{}` dropped at the depth bound",
                call
            ));
        }
        if out.is_empty() {
            self.exhausted = true;
        }
        Ok(out)
    }
}

fn run(t: &HeapTerm, env: &Env, depth: usize, expand_calls: bool) -> Result<Unfolding, EnvError> {
    let mut u = Unfolder {
        env,
        bound: depth,
        expand_calls,
        fresh: 0,
        exhausted: false,
        notices: Vec::new(),
    };
    let alts = u.walk(t, ScopeState::default())?;
    let mut alternatives: Vec<HeapTerm> = Vec::new();
    for (t, _) in alts {
        let t = t.reassociate();
        if !alternatives.contains(&t) {
            alternatives.push(t);
        }
    }
    Ok(Unfolding {
        alternatives,
        exhausted: u.exhausted,
        notices: u.notices,
    })
}

/// Expands partial constants and predicate calls up to `depth` nested calls.
pub fn unfold(t: &HeapTerm, env: &Env, depth: usize) -> Result<Unfolding, EnvError> {
    let out = run(t, env, depth, true)?;
    if out.alternatives.is_empty() && out.exhausted {
        return Err(EnvError::DepthExhausted(t.to_string()));
    }
    Ok(out)
}

/// Expands partial constants only; calls stay opaque.
pub fn unfold_partial(t: &HeapTerm, env: &Env) -> Result<HeapTerm, EnvError> {
    let mut out = run(t, env, 0, false)?;
    Ok(out.alternatives.remove(0))
}

pub fn unfold_predicate(
    call: &PredCall,
    env: &Env,
    depth: usize,
) -> Result<Vec<HeapTerm>, EnvError> {
    Ok(unfold(&HeapTerm::Call(call.clone()), env, depth)?.alternatives)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[allow(clippy::large_enum_variant)]
pub enum RepetitionVerdict {
    Witness {
        witness: Witness,
        unfolded: HeapTerm,
    },
    Clean,
    Inconclusive,
}

impl fmt::Display for RepetitionVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepetitionVerdict::Witness { witness, unfolded } => {
                write!(f, "{witness} in `{unfolded}`")
            }
            RepetitionVerdict::Clean => f.write_str("no repetition"),
            RepetitionVerdict::Inconclusive => f.write_str("inconclusive within the depth bound"),
        }
    }
}

fn heap_leaves<'a>(t: &'a ExtTerm, out: &mut Vec<&'a HeapTerm>) {
    match t {
        ExtTerm::Heap(h) => out.push(h),
        ExtTerm::Not(e) => heap_leaves(e, out),
        ExtTerm::And(l, r) | ExtTerm::Or(l, r) => {
            heap_leaves(l, out);
            heap_leaves(r, out);
        }
    }
}

/// Unfolds every spatial part of `t` and reports the first repetition
/// inside one `*`-scope, across predicate boundaries.
pub fn check_repetition_stack(
    t: &ExtTerm,
    env: &Env,
    depth: usize,
) -> Result<RepetitionVerdict, EnvError> {
    let mut leaves = Vec::new();
    heap_leaves(t, &mut leaves);
    let mut inconclusive = false;
    for h in leaves {
        let out = match unfold(h, env, depth) {
            Ok(out) => out,
            Err(EnvError::DepthExhausted(_)) => {
                inconclusive = true;
                continue;
            }
            Err(e) => return Err(e),
        };
        inconclusive |= out.exhausted;
        for alt in out.alternatives {
            if let Some(witness) = detect_repetition(&alt) {
                return Ok(RepetitionVerdict::Witness {
                    witness,
                    unfolded: alt,
                });
            }
        }
    }
    Ok(if inconclusive {
        RepetitionVerdict::Inconclusive
    } else {
        RepetitionVerdict::Clean
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Clause, PredicateDef};
    use crate::term::{parse_heap, parse_term};

    fn t(src: &str) -> HeapTerm {
        parse_heap(src).unwrap()
    }

    fn env() -> Env {
        let mut env = Env::new();
        env.add_class("A", &["f1", "g1", "g2"]).add_typing("a", "A");
        env.add_class("E", &[]).add_typing("e", "E");
        env.add_predicate(PredicateDef {
            name: "tree".into(),
            params: vec!["l".into()],
            clauses: vec![
                Clause {
                    exists: vec![],
                    body: HeapTerm::Emp,
                },
                Clause {
                    exists: vec!["x".into(), "y".into()],
                    body: t("l |-> (left: x, right: y) * tree(x) * tree(y)"),
                },
            ],
        });
        env
    }

    #[test]
    fn true_consumes_remaining_fields() {
        let out = unfold_partial(&t("a.f1 |-> x * true(a)"), &env()).unwrap();
        assert_eq!(out.to_string(), "a.f1 |-> x * a.g1 |-> _ * a.g2 |-> _");
        let out = unfold_partial(&t("true(a) * a.f1 |-> x"), &env()).unwrap();
        assert_eq!(out.to_string(), "a.g1 |-> _ * a.g2 |-> _ * a.f1 |-> x");
    }

    #[test]
    fn second_true_becomes_emp() {
        let out = unfold_partial(&t("true(a) * true(a)"), &env()).unwrap();
        assert_eq!(
            out.to_string(),
            "a.f1 |-> _ * a.g1 |-> _ * a.g2 |-> _ * emp"
        );
    }

    #[test]
    fn empty_class_gives_emp() {
        assert_eq!(
            unfold_partial(&t("true(e)"), &env()).unwrap(),
            HeapTerm::Emp
        );
    }

    #[test]
    fn untyped_object_is_an_error() {
        assert_eq!(
            unfold_partial(&t("true(z)"), &env()),
            Err(EnvError::UntypedObject("z".into()))
        );
    }

    #[test]
    fn tree_unfolding_counts() {
        let call = PredCall {
            name: "tree".into(),
            args: vec![Arg::Value(Value::sym("l"))],
        };
        let counts: Vec<usize> = (0..4)
            .map(|d| unfold_predicate(&call, &env(), d).unwrap().len())
            .collect();
        assert_eq!(counts, vec![1, 2, 5, 26]);
    }

    #[test]
    fn existentials_are_fresh() {
        let call = PredCall {
            name: "tree".into(),
            args: vec![Arg::Value(Value::sym("l"))],
        };
        let alts = unfold_predicate(&call, &env(), 1).unwrap();
        assert_eq!(
            alts[1].to_string(),
            "l |-> (left: x#1, right: y#2) * emp * emp"
        );
    }

    #[test]
    fn arity_and_unknown_predicates() {
        let e = env();
        assert!(matches!(
            unfold(&t("tree(a, b)"), &e, 1),
            Err(EnvError::ArityMismatch { .. })
        ));
        assert!(matches!(
            unfold(&t("nope(a)"), &e, 1),
            Err(EnvError::UnknownPredicate(_))
        ));
    }

    #[test]
    fn only_recursive_clauses_exhaust() {
        let mut e = Env::new();
        e.add_predicate(PredicateDef {
            name: "loop".into(),
            params: vec!["x".into()],
            clauses: vec![Clause {
                exists: vec![],
                body: t("x |-> y * loop(y)"),
            }],
        });
        assert!(matches!(
            unfold(&t("loop(a)"), &e, 3),
            Err(EnvError::DepthExhausted(_))
        ));
        let v = check_repetition_stack(&parse_term("loop(a)").unwrap(), &e, 3).unwrap();
        assert_eq!(v, RepetitionVerdict::Inconclusive);
    }

    #[test]
    fn repetition_across_predicate_levels() {
        let mut e = Env::new();
        e.add_predicate(PredicateDef {
            name: "p".into(),
            params: vec!["x".into()],
            clauses: vec![Clause {
                exists: vec![],
                body: t("x |-> 1 * p2(x)"),
            }],
        });
        e.add_predicate(PredicateDef {
            name: "p2".into(),
            params: vec!["x".into()],
            clauses: vec![Clause {
                exists: vec![],
                body: t("x |-> 1"),
            }],
        });
        let v = check_repetition_stack(&parse_term("p(a)").unwrap(), &e, 1).unwrap();
        assert!(matches!(v, RepetitionVerdict::Witness { .. }));
        let v = check_repetition_stack(&parse_term("tree(l)").unwrap(), &env(), 3).unwrap();
        assert_eq!(v, RepetitionVerdict::Clean);
    }

    #[test]
    fn term_arguments_replace_bare_parameters() {
        let mut e = Env::new();
        e.add_predicate(PredicateDef {
            name: "wrap".into(),
            params: vec!["h".into(), "x".into()],
            clauses: vec![Clause {
                exists: vec![],
                body: t("x |-> r * h"),
            }],
        });
        let out = unfold(&t("wrap(r |-> s, a)"), &e, 1).unwrap();
        assert_eq!(out.alternatives, vec![t("a |-> r * r |-> s")]);
    }
}
