use serde::Serialize;

use super::{unfold, Env, EnvError};
use crate::algebra::{normalize, Component, NormalForm};
use crate::term::{ExtTerm, Heaplet};

/// The satisfiable normal forms an extended term can denote.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Denotation {
    pub forms: Vec<NormalForm>,
}

impl Denotation {
    fn contains_match(&self, nf: &NormalForm) -> bool {
        self.forms.iter().any(|f| forms_match(f, nf))
    }
}

fn heaplet_match(a: &Heaplet, b: &Heaplet) -> bool {
    a.loc == b.loc && (a.val == b.val || a.val.is_placeholder() || b.val.is_placeholder())
}

/// Heaplets are matched by location; `_` matches any value; an open
/// component admits heaplets beyond the ones it lists.
fn components_match(a: &Component, b: &Component) -> bool {
    let covered = |x: &Component, y: &Component| {
        x.heaplets
            .iter()
            .all(|h| match y.heaplets.iter().find(|g| g.loc == h.loc) {
                Some(g) => heaplet_match(h, g),
                None => y.open,
            })
    };
    covered(a, b) && covered(b, a)
}

fn assign(a: &[Component], b: &[Component], used: &mut Vec<bool>) -> bool {
    let Some((first, rest)) = a.split_first() else {
        return true;
    };
    for j in 0..b.len() {
        if !used[j] && components_match(first, &b[j]) {
            used[j] = true;
            if assign(rest, b, used) {
                return true;
            }
            used[j] = false;
        }
    }
    false
}

fn forms_match(a: &NormalForm, b: &NormalForm) -> bool {
    a.satisfiable == b.satisfiable
        && a.disjuncts.len() == b.disjuncts.len()
        && assign(
            &a.disjuncts,
            &b.disjuncts,
            &mut vec![false; b.disjuncts.len()],
        )
}

/// Unfolds and normalizes every alternative of `t`. `|` is union, `&&`
/// intersection; negation has no spatial reading and is rejected.
pub fn denotation(t: &ExtTerm, env: &Env, depth: usize) -> Result<Denotation, EnvError> {
    Ok(match t {
        ExtTerm::Heap(h) => {
            let mut forms: Vec<NormalForm> = Vec::new();
            for alt in unfold(h, env, depth)?.alternatives {
                let nf = normalize(&alt, env)?;
                if nf.satisfiable && !forms.contains(&nf) {
                    forms.push(nf);
                }
            }
            Denotation { forms }
        }
        ExtTerm::Or(l, r) => {
            let mut d = denotation(l, env, depth)?;
            for nf in denotation(r, env, depth)?.forms {
                if !d.forms.contains(&nf) {
                    d.forms.push(nf);
                }
            }
            d
        }
        ExtTerm::And(l, r) => {
            let (l, r) = (denotation(l, env, depth)?, denotation(r, env, depth)?);
            Denotation {
                forms: l
                    .forms
                    .into_iter()
                    .filter(|f| r.contains_match(f))
                    .collect(),
            }
        }
        ExtTerm::Not(_) => return Err(EnvError::UnsupportedConnective(t.to_string())),
    })
}

/// True iff every denoted heap of one side is matched on the other side.
pub fn compare_denotation(
    expected: &ExtTerm,
    actual: &ExtTerm,
    env: &Env,
    depth: usize,
) -> Result<bool, EnvError> {
    let (e, a) = (
        denotation(expected, env, depth)?,
        denotation(actual, env, depth)?,
    );
    Ok(e.forms.iter().all(|f| a.contains_match(f)) && a.forms.iter().all(|f| e.contains_match(f)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Clause, PredicateDef};
    use crate::term::{parse_term, HeapTerm};

    fn env() -> Env {
        let mut env = Env::new();
        env.add_class("A", &["f1", "g1", "g2"]).add_typing("a", "A");
        env.add_predicate(PredicateDef {
            name: "p".into(),
            params: vec!["o".into()],
            clauses: vec![Clause {
                exists: vec![],
                body: HeapTerm::TruePartial("o".into()),
            }],
        });
        env
    }

    fn same(x: &str, y: &str) -> bool {
        compare_denotation(&parse_term(x).unwrap(), &parse_term(y).unwrap(), &env(), 4).unwrap()
    }

    #[test]
    fn partial_specification_equalities() {
        let full = "a.f1 * a.g1 * a.g2";
        assert!(same("a.f1 |-> x * true(a)", full));
        assert!(same("true(a) * a.f1 |-> x", full));
        assert!(!same("true(a) * a.f1 |-> x", "p(a) * a.f1 |-> x"));
        assert!(same("a.f1 |-> x * p(a)", full));
        assert!(same("true(a) * true(a)", "a.f1 * a.g1 * a.g2 * emp(a)"));
    }

    #[test]
    fn values_must_agree_unless_placeholder() {
        assert!(!same("a.f1 |-> x * true(a)", "a.f1 |-> y * true(a)"));
        assert!(same(
            "a.f1 |-> x * a.g1 |-> _ * a.g2 |-> z",
            "a.f1 |-> x * true(a)"
        ));
    }

    #[test]
    fn open_components_admit_extra_heaplets() {
        let e = Env::new();
        let d = |s: &str| denotation(&parse_term(s).unwrap(), &e, 1).unwrap();
        let open = &d("a |-> b * true").forms[0];
        let closed = &d("a |-> b * b |-> c").forms[0];
        assert!(forms_match(open, closed));
        assert!(!forms_match(&d("a |-> b").forms[0], closed));
    }

    #[test]
    fn negation_is_rejected() {
        let t = parse_term("!a |-> b").unwrap();
        assert!(matches!(
            denotation(&t, &Env::new(), 1),
            Err(EnvError::UnsupportedConnective(_))
        ));
    }
}
