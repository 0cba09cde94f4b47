//! Heap conjunction and disjunction on graphs, inverse heaps with
//! cancellation, distribution to the `||`-normal form, and the join/split
//! rules.

mod normal;
mod ops;
mod rules;

use serde::Serialize;
use thiserror::Error;

use crate::graph::BuildError;
use crate::term::{HeapTerm, Heaplet};

pub use normal::{
    cancel, diff, equiv, normalize, normalize_with_diagnostics, Component, Diagnostic, Diff,
    NormalForm,
};
pub use ops::{conjoin, conjoin_heaplet, disjoin};
pub use rules::{
    apply_join, apply_split, detect_repetition, distribute, join_rule, split_rule, RuleError,
    Witness, WitnessKind,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("partial constants or predicate calls need unfolding: {0}")]
    NeedsEnv(String),
    #[error("inverse heaplet `{0}` has no positive partner")]
    UnmatchedInverse(Heaplet),
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// One `*`-scope of a distributed term: signed heaplets in textual order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Scope {
    pub items: Vec<(Heaplet, bool)>,
    /// Contains total `true`.
    pub open: bool,
    /// Contains total `false`.
    pub falsum: bool,
}

impl Scope {
    fn merge(&self, other: &Scope) -> Scope {
        let mut items = self.items.clone();
        items.extend(other.items.iter().cloned());
        Scope {
            items,
            open: self.open || other.open,
            falsum: self.falsum || other.falsum,
        }
    }

    pub fn positives(&self) -> impl Iterator<Item = &Heaplet> {
        self.items.iter().filter(|(_, p)| *p).map(|(h, _)| h)
    }

    pub fn has_inverse(&self) -> bool {
        self.items.iter().any(|(_, p)| !p)
    }

    pub fn to_term(&self) -> HeapTerm {
        let mut parts: Vec<HeapTerm> = self
            .items
            .iter()
            .map(|(h, pos)| {
                let t = HeapTerm::from(h.clone());
                if *pos {
                    t
                } else {
                    HeapTerm::inv(t)
                }
            })
            .collect();
        if self.open {
            parts.push(HeapTerm::TrueTotal);
        }
        if self.falsum {
            parts.push(HeapTerm::FalseTotal);
        }
        HeapTerm::conj_all(parts)
    }
}

fn dnf_rec(t: &HeapTerm, neg: bool, lenient: bool) -> Result<Vec<Scope>, AlgebraError> {
    Ok(match t {
        HeapTerm::Emp => vec![Scope::default()],
        HeapTerm::TrueTotal => vec![Scope {
            open: true,
            ..Scope::default()
        }],
        HeapTerm::FalseTotal => vec![Scope {
            falsum: true,
            ..Scope::default()
        }],
        HeapTerm::PointsTo(h) => vec![Scope {
            items: h.expand().into_iter().map(|h| (h, !neg)).collect(),
            ..Scope::default()
        }],
        HeapTerm::Conj(l, r) => {
            let (ls, rs) = (dnf_rec(l, neg, lenient)?, dnf_rec(r, neg, lenient)?);
            ls.iter()
                .flat_map(|a| rs.iter().map(move |b| a.merge(b)))
                .collect()
        }
        HeapTerm::Disj(l, r) => {
            let mut out = dnf_rec(l, neg, lenient)?;
            out.extend(dnf_rec(r, neg, lenient)?);
            out
        }
        HeapTerm::Inv(inner) => dnf_rec(inner, !neg, lenient)?,
        HeapTerm::TruePartial(_)
        | HeapTerm::FalsePartial(_)
        | HeapTerm::EmpPartial(_)
        | HeapTerm::Call(_) => {
            if lenient {
                vec![Scope::default()]
            } else {
                return Err(AlgebraError::NeedsEnv(t.to_string()));
            }
        }
    })
}

/// Distributes `*` over `||` and pushes inverses to the heaplets.
pub fn dnf(t: &HeapTerm) -> Result<Vec<Scope>, AlgebraError> {
    dnf_rec(t, false, false)
}

pub(crate) fn dnf_lenient(t: &HeapTerm) -> Vec<Scope> {
    dnf_rec(t, false, true).expect("lenient distribution never fails")
}

/// The inverse heap, with `inv` pushed down to the heaplets.
pub fn invert(t: &HeapTerm) -> HeapTerm {
    match t {
        HeapTerm::Emp | HeapTerm::TrueTotal | HeapTerm::FalseTotal => t.clone(),
        HeapTerm::Conj(l, r) => HeapTerm::conj(invert(l), invert(r)),
        HeapTerm::Disj(l, r) => HeapTerm::disj(invert(l), invert(r)),
        HeapTerm::Inv(inner) => push_inverses(inner),
        other => HeapTerm::inv(other.clone()),
    }
}

/// Rewrites every `inv` so that it only wraps heaplets or opaque atoms.
pub fn push_inverses(t: &HeapTerm) -> HeapTerm {
    match t {
        HeapTerm::Conj(l, r) => HeapTerm::conj(push_inverses(l), push_inverses(r)),
        HeapTerm::Disj(l, r) => HeapTerm::disj(push_inverses(l), push_inverses(r)),
        HeapTerm::Inv(inner) => invert(inner),
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_heap;

    fn t(src: &str) -> HeapTerm {
        parse_heap(src).unwrap()
    }

    #[test]
    fn invert_is_a_homomorphism() {
        assert_eq!(
            invert(&t("a |-> b * c |-> d")),
            t("inv(a |-> b) * inv(c |-> d)")
        );
        assert_eq!(invert(&t("emp")), t("emp"));
        assert_eq!(invert(&invert(&t("a |-> b"))), t("a |-> b"));
        assert_eq!(invert(&t("inv(a |-> b * c |-> d)")), t("a |-> b * c |-> d"));
    }

    #[test]
    fn dnf_lifts_disjunction() {
        let scopes = dnf(&t("a |-> b * (b |-> c || b |-> d)")).unwrap();
        assert_eq!(scopes.len(), 2);
        assert_eq!(scopes[1].to_term(), t("a |-> b * b |-> d"));
    }

    #[test]
    fn dnf_signs_inverses() {
        let scopes = dnf(&t("a |-> b * inv(inv(c |-> d) * e |-> f)")).unwrap();
        let signs: Vec<bool> = scopes[0].items.iter().map(|(_, p)| *p).collect();
        assert_eq!(signs, vec![true, true, false]);
    }

    #[test]
    fn dnf_rejects_partials() {
        assert!(matches!(dnf(&t("true(a)")), Err(AlgebraError::NeedsEnv(_))));
    }
}
