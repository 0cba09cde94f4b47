use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::{dnf, dnf_lenient, normalize_with_diagnostics, AlgebraError};
use crate::env::Env;
use crate::term::{HeapTerm, Heaplet, Location};

/// Rewrites to `||`-outermost form (both distributivity orientations).
pub fn distribute(t: &HeapTerm) -> Result<HeapTerm, AlgebraError> {
    Ok(HeapTerm::disj_all(dnf(t)?.iter().map(|s| s.to_term())))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule not applicable: {0}")]
    RuleInapplicable(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

fn strictly_sat(t: &HeapTerm, env: &Env) -> Result<bool, RuleError> {
    let (nf, dropped) = normalize_with_diagnostics(t, env)?;
    Ok(nf.satisfiable && dropped.is_empty())
}

fn with_u(u: &HeapTerm, b: &Heaplet) -> HeapTerm {
    let b = HeapTerm::from(b.clone());
    match u {
        HeapTerm::Emp => b,
        u => HeapTerm::conj(u.clone(), b),
    }
}

fn require(cond: bool, what: impl FnOnce() -> String) -> Result<(), RuleError> {
    if cond {
        Ok(())
    } else {
        Err(RuleError::RuleInapplicable(what()))
    }
}

fn shapes(u: &HeapTerm, b: &Heaplet, c: &Heaplet) -> (HeapTerm, HeapTerm) {
    let ub = with_u(u, b);
    let joined = HeapTerm::conj(ub.clone(), c.clone().into());
    let split = HeapTerm::disj(ub, c.clone().into());
    (joined, split)
}

/// `U * B || C` becomes `U * B * C`.
pub fn join_rule(u: &HeapTerm, b: &Heaplet, c: &Heaplet, env: &Env) -> Result<HeapTerm, RuleError> {
    let (joined, split) = shapes(u, b, c);
    require(strictly_sat(&split, env)?, || {
        format!("`{split}` is not satisfiable")
    })?;
    require(strictly_sat(&joined, env)?, || {
        format!("`{b}` and `{c}` cannot be conjoined")
    })?;
    Ok(joined)
}

/// `U * B * C` becomes `U * B || C`.
pub fn split_rule(
    u: &HeapTerm,
    b: &Heaplet,
    c: &Heaplet,
    env: &Env,
) -> Result<HeapTerm, RuleError> {
    let (joined, split) = shapes(u, b, c);
    require(strictly_sat(&joined, env)?, || {
        format!("`{joined}` is not satisfiable")
    })?;
    require(strictly_sat(&split, env)?, || {
        format!("`{split}` is not satisfiable")
    })?;
    Ok(split)
}

fn split_ub(t: &HeapTerm) -> Option<(HeapTerm, &Heaplet)> {
    match t {
        HeapTerm::PointsTo(b) => Some((HeapTerm::Emp, b)),
        HeapTerm::Conj(u, b) => match b.as_ref() {
            HeapTerm::PointsTo(b) => Some(((**u).clone(), b)),
            _ => None,
        },
        _ => None,
    }
}

/// Applies the join rule at the root of `t`.
pub fn apply_join(t: &HeapTerm, env: &Env) -> Result<HeapTerm, RuleError> {
    if let HeapTerm::Disj(l, r) = t {
        if let (Some((u, b)), HeapTerm::PointsTo(c)) = (split_ub(l), r.as_ref()) {
            return join_rule(&u, b, c, env);
        }
    }
    Err(RuleError::RuleInapplicable(format!(
        "`{t}` is not of shape U * B || C"
    )))
}

/// Applies the split rule at the root of `t`.
pub fn apply_split(t: &HeapTerm, env: &Env) -> Result<HeapTerm, RuleError> {
    if let HeapTerm::Conj(l, r) = t {
        if let (Some((u, b)), HeapTerm::PointsTo(c)) = (split_ub(l), r.as_ref()) {
            return split_rule(&u, b, c, env);
        }
    }
    Err(RuleError::RuleInapplicable(format!(
        "`{t}` is not of shape U * B * C"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    DuplicateHeaplet,
    DuplicateSource,
}

/// Two heaplets of one `*`-scope that violate non-repetitiveness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub first: Heaplet,
    pub second: Heaplet,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            WitnessKind::DuplicateHeaplet => write!(f, "duplicate heaplet `{}`", self.first),
            WitnessKind::DuplicateSource => write!(
                f,
                "duplicate source: `{}` and `{}`",
                self.first, self.second
            ),
        }
    }
}

/// Object and slot written by a heaplet; plain variables have no slot.
fn source(loc: &Location) -> (Location, Option<&str>) {
    match loc.split_last() {
        Some((obj, f)) => (obj, Some(f)),
        None => (loc.clone(), None),
    }
}

fn same_source(a: &Location, b: &Location) -> bool {
    let ((oa, sa), (ob, sb)) = (source(a), source(b));
    if sa.is_none() || sb.is_none() {
        // A plain cell and a field of the same name collide.
        let (va, vb) = (
            if sa.is_none() { a } else { &oa },
            if sb.is_none() { b } else { &ob },
        );
        return va == vb;
    }
    oa == ob && sa == sb
}

/// First repeated heaplet or source inside any `*`-scope. Inverses remove
/// their partner from the open scope; predicate calls and partial
/// constants are skipped.
pub fn detect_repetition(t: &HeapTerm) -> Option<Witness> {
    for scope in dnf_lenient(t) {
        let mut live: Vec<&Heaplet> = Vec::new();
        for (h, pos) in &scope.items {
            if !pos {
                if let Some(i) = live.iter().position(|g| *g == h) {
                    live.remove(i);
                }
                continue;
            }
            if let Some(g) = live.iter().find(|g| **g == h) {
                return Some(Witness {
                    kind: WitnessKind::DuplicateHeaplet,
                    first: (*g).clone(),
                    second: h.clone(),
                });
            }
            if let Some(g) = live.iter().find(|g| same_source(&g.loc, &h.loc)) {
                return Some(Witness {
                    kind: WitnessKind::DuplicateSource,
                    first: (*g).clone(),
                    second: h.clone(),
                });
            }
            live.push(h);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::normalize;
    use crate::term::parse_heap;

    fn t(src: &str) -> HeapTerm {
        parse_heap(src).unwrap()
    }

    fn h(a: &str, b: &str) -> Heaplet {
        Heaplet::simple(a, b)
    }

    #[test]
    fn distribute_both_orientations() {
        assert_eq!(
            distribute(&t("a |-> b * (b |-> c || b |-> d)")).unwrap(),
            t("a |-> b * b |-> c || a |-> b * b |-> d")
        );
        assert_eq!(
            distribute(&t("(b |-> c || b |-> d) * a |-> b")).unwrap(),
            t("b |-> c * a |-> b || b |-> d * a |-> b")
        );
    }

    #[test]
    fn join_and_split_are_dual() {
        let env = Env::default();
        let u = t("x |-> a");
        let (b, c) = (h("a", "b"), h("b", "c"));
        let joined = join_rule(&u, &b, &c, &env).unwrap();
        assert_eq!(joined, t("x |-> a * a |-> b * b |-> c"));
        let split = split_rule(&u, &b, &c, &env).unwrap();
        assert_eq!(split, t("x |-> a * a |-> b || b |-> c"));

        let sjs = apply_split(
            &apply_join(&apply_split(&joined, &env).unwrap(), &env).unwrap(),
            &env,
        )
        .unwrap();
        assert_eq!(normalize(&sjs, &env), normalize(&split, &env));
        let jsj = apply_join(
            &apply_split(&apply_join(&split, &env).unwrap(), &env).unwrap(),
            &env,
        )
        .unwrap();
        assert_eq!(normalize(&jsj, &env), normalize(&joined, &env));
    }

    #[test]
    fn join_requires_connectible_heaplets() {
        let err = join_rule(&HeapTerm::Emp, &h("a", "b"), &h("c", "d"), &Env::default());
        assert!(matches!(err, Err(RuleError::RuleInapplicable(_))));
    }

    #[test]
    fn repetition_witnesses() {
        let w = detect_repetition(&t("a |-> b * a |-> b")).unwrap();
        assert_eq!(w.kind, WitnessKind::DuplicateHeaplet);
        let w = detect_repetition(&t("a |-> b * a |-> d")).unwrap();
        assert_eq!(
            (w.kind, w.second.clone()),
            (WitnessKind::DuplicateSource, h("a", "d"))
        );
        assert_eq!(detect_repetition(&t("a |-> b || c |-> d")), None);
        assert_eq!(
            detect_repetition(&t("a |-> b * inv(a |-> b) * a |-> b")),
            None
        );
        assert!(detect_repetition(&t("a |-> b * a.f |-> c")).is_some());
        assert_eq!(detect_repetition(&t("a.f |-> b * a.g |-> c")), None);
    }
}
