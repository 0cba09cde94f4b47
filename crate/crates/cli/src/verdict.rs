//! Satisfiability verdicts for goals.

use heaplogic::algebra::{normalize_with_diagnostics, AlgebraError};
use heaplogic::env::{unfold, Env, EnvError};
use heaplogic::graph::{build_graph, BuildError, HeapGraph, UnsatReason};
use heaplogic::term::{ExtTerm, HeapTerm};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Sat,
    Unsat,
    Inconclusive,
}

impl Verdict {
    pub fn exit_code(self) -> u8 {
        match self {
            Verdict::Sat => 0,
            Verdict::Unsat => 1,
            Verdict::Inconclusive => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Sat => "sat",
            Verdict::Unsat => "unsat",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub verdict: Verdict,
    pub reason: Option<String>,
    pub witness: Vec<String>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn sat(warnings: Vec<String>) -> Self {
        Outcome {
            verdict: Verdict::Sat,
            reason: None,
            witness: Vec::new(),
            warnings,
        }
    }

    fn unsat(reason: impl Into<String>, witness: Vec<String>) -> Self {
        Outcome {
            verdict: Verdict::Unsat,
            reason: Some(reason.into()),
            witness,
            warnings: Vec::new(),
        }
    }

    fn inconclusive(reason: String) -> Self {
        Outcome {
            verdict: Verdict::Inconclusive,
            reason: Some(reason),
            witness: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

pub struct Checker<'a> {
    pub env: &'a Env,
    pub depth: usize,
    pub strict_garbage: bool,
}

fn garbage_warnings(g: &HeapGraph) -> Vec<String> {
    g.rootless_components()
        .iter()
        .map(|c| {
            let vs: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            format!("unreachable from any stack root: {}", vs.join(", "))
        })
        .collect()
}

impl Checker<'_> {
    /// Builds the graph of a term that needs no unfolding.
    pub fn ground_graph(&self, h: &HeapTerm) -> Result<Result<HeapGraph, Outcome>, String> {
        let built = if h.has_inverse() {
            match normalize_with_diagnostics(h, self.env) {
                Ok((nf, drops)) if !nf.satisfiable => {
                    return Ok(Err(match drops.into_iter().next() {
                        Some(d) => unsat_of(d.unsat),
                        None => Outcome::unsat(UnsatReason::ExplicitFalse.to_string(), vec![]),
                    }))
                }
                Ok((nf, _)) => build_graph(&nf.to_term(), self.env),
                Err(AlgebraError::UnmatchedInverse(h)) => {
                    return Ok(Err(Outcome::unsat(
                        "unmatched-inverse",
                        vec![h.to_string()],
                    )))
                }
                Err(e) => return Err(e.to_string()),
            }
        } else {
            build_graph(h, self.env)
        };
        match built {
            Ok(g) => Ok(Ok(g)),
            Err(BuildError::Unsat(u)) => Ok(Err(unsat_of(u))),
            Err(e) => Err(e.to_string()),
        }
    }

    fn ground(&self, h: &HeapTerm) -> Result<Outcome, String> {
        Ok(match self.ground_graph(h)? {
            Err(o) => o,
            Ok(g) => {
                let warnings = garbage_warnings(&g);
                if self.strict_garbage && !warnings.is_empty() {
                    Outcome::unsat("garbage", warnings)
                } else {
                    Outcome::sat(warnings)
                }
            }
        })
    }

    /// A spatial term is satisfiable iff one of its unfoldings is.
    pub fn heap(&self, h: &HeapTerm) -> Result<Outcome, String> {
        if !h.has_partial() && !h.has_call() {
            return self.ground(h);
        }
        let out = match unfold(h, self.env, self.depth) {
            Ok(out) => out,
            Err(EnvError::DepthExhausted(_)) => return Ok(self.exhausted()),
            Err(e) => return Err(e.to_string()),
        };
        let mut first_unsat = None;
        for alt in &out.alternatives {
            let o = self.ground(alt)?;
            if o.verdict == Verdict::Sat {
                return Ok(o);
            }
            first_unsat.get_or_insert(o);
        }
        Ok(match first_unsat {
            Some(_) if out.exhausted => self.exhausted(),
            Some(o) => o,
            None => Outcome::unsat(UnsatReason::ExplicitFalse.to_string(), vec![]),
        })
    }

    fn exhausted(&self) -> Outcome {
        Outcome::inconclusive(format!("depth bound {} exhausted", self.depth))
    }

    pub fn term(&self, t: &ExtTerm) -> Result<Outcome, String> {
        match t {
            ExtTerm::Heap(h) => self.heap(h),
            ExtTerm::Not(e) => {
                let mut o = self.term(e)?;
                o.verdict = match o.verdict {
                    Verdict::Sat => Verdict::Unsat,
                    Verdict::Unsat => Verdict::Sat,
                    Verdict::Inconclusive => Verdict::Inconclusive,
                };
                Ok(o)
            }
            ExtTerm::And(l, r) => {
                let (l, r) = (self.term(l)?, self.term(r)?);
                Ok(pick(l, r, Verdict::Unsat))
            }
            ExtTerm::Or(l, r) => {
                let (l, r) = (self.term(l)?, self.term(r)?);
                Ok(pick(l, r, Verdict::Sat))
            }
        }
    }
}

/// Boolean combination: `dominant` wins, then inconclusive, then the rest.
fn pick(l: Outcome, r: Outcome, dominant: Verdict) -> Outcome {
    for v in [dominant, Verdict::Inconclusive] {
        if l.verdict == v {
            return l;
        }
        if r.verdict == v {
            return r;
        }
    }
    l
}

fn unsat_of(u: heaplogic::graph::Unsat) -> Outcome {
    Outcome::unsat(
        u.reason.to_string(),
        u.witness.iter().map(|h| h.to_string()).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use heaplogic::term::parse_term;

    fn verdict(src: &str) -> Outcome {
        let env = Env::new();
        let c = Checker {
            env: &env,
            depth: 4,
            strict_garbage: false,
        };
        c.term(&parse_term(src).unwrap()).unwrap()
    }

    #[test]
    fn connectives() {
        assert_eq!(verdict("x |-> z * y |-> z").verdict, Verdict::Sat);
        let o = verdict("a |-> 5 * b |-> 5");
        assert_eq!(o.reason.as_deref(), Some("not-connectible"));
        assert_eq!(verdict("!(a |-> 5 * b |-> 5)").verdict, Verdict::Sat);
        assert_eq!(
            verdict("a |-> b && a |-> b * a |-> b").verdict,
            Verdict::Unsat
        );
        assert_eq!(verdict("a |-> b | a |-> b * a |-> b").verdict, Verdict::Sat);
    }

    #[test]
    fn inverse_terms_are_cancelled_first() {
        assert_eq!(
            verdict("a |-> b * b |-> c * inv(b |-> c)").verdict,
            Verdict::Sat
        );
        let o = verdict("inv(a |-> b)");
        assert_eq!(o.reason.as_deref(), Some("unmatched-inverse"));
    }
}
