//! Declaration context: class layouts, object typings and abstract
//! predicates, plus bounded unfolding and denotation comparison.

mod denote;
mod unfold;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::term::{Arg, HeapTerm, PredCall};

pub use denote::{compare_denotation, denotation, Denotation};
pub use unfold::{
    check_repetition_stack, unfold, unfold_partial, unfold_predicate, RepetitionVerdict,
    ScopeState, Unfolding,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassDecl {
    pub name: String,
    /// Field names after inheritance and mangling, in declaration order.
    pub fields: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Clause {
    pub exists: Vec<String>,
    pub body: HeapTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PredicateDef {
    pub name: String,
    pub params: Vec<String>,
    pub clauses: Vec<Clause>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("object `{0}` has no class typing")]
    UntypedObject(String),
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{name}` expects {expected} arguments, got {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("argument `{arg}` of `{pred}` cannot be used as {role}")]
    BadArgument {
        pred: String,
        arg: String,
        role: &'static str,
    },
    #[error("unfolding `{0}` exhausted the depth bound")]
    DepthExhausted(String),
    #[error("logical connective inside a spatial comparison: {0}")]
    UnsupportedConnective(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Env {
    pub classes: BTreeMap<String, ClassDecl>,
    pub typings: BTreeMap<String, String>,
    pub predicates: BTreeMap<String, PredicateDef>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_class(&mut self, name: &str, fields: &[&str]) -> &mut Self {
        self.classes.insert(
            name.into(),
            ClassDecl {
                name: name.into(),
                fields: fields.iter().map(|f| f.to_string()).collect(),
            },
        );
        self
    }

    pub fn add_typing(&mut self, obj: &str, class: &str) -> &mut Self {
        self.typings.insert(obj.into(), class.into());
        self
    }

    pub fn add_predicate(&mut self, def: PredicateDef) -> &mut Self {
        self.predicates.insert(def.name.clone(), def);
        self
    }

    /// Class of an object, if typed.
    pub fn class_of(&self, obj: &str) -> Option<&ClassDecl> {
        self.typings.get(obj).and_then(|c| self.classes.get(c))
    }

    pub fn fields_of(&self, obj: &str) -> Result<&[String], EnvError> {
        self.class_of(obj)
            .map(|c| c.fields.as_slice())
            .ok_or_else(|| EnvError::UntypedObject(obj.into()))
    }

    pub fn predicate(&self, call: &PredCall) -> Result<&PredicateDef, EnvError> {
        let def = self
            .predicates
            .get(&call.name)
            .ok_or_else(|| EnvError::UnknownPredicate(call.name.clone()))?;
        if def.params.len() != call.args.len() {
            return Err(EnvError::ArityMismatch {
                name: call.name.clone(),
                expected: def.params.len(),
                found: call.args.len(),
            });
        }
        Ok(def)
    }

    /// Checks cross references: typings name declared classes, class fields
    /// are distinct, calls match arities, clauses are pairwise distinct.
    pub fn validate(&self) -> Result<(), EnvError> {
        for class in self.typings.values() {
            if !self.classes.contains_key(class) {
                return Err(EnvError::UnknownClass(class.clone()));
            }
        }
        for c in self.classes.values() {
            let mut seen = BTreeSet::new();
            for f in &c.fields {
                if !seen.insert(f) {
                    return Err(EnvError::Duplicate {
                        kind: "field",
                        name: format!("{}.{f}", c.name),
                    });
                }
            }
        }
        for def in self.predicates.values() {
            for (i, clause) in def.clauses.iter().enumerate() {
                if def.clauses[..i].contains(clause) {
                    return Err(EnvError::Duplicate {
                        kind: "clause in predicate",
                        name: def.name.clone(),
                    });
                }
                self.check_calls(&clause.body)?;
            }
        }
        Ok(())
    }

    pub fn check_calls(&self, t: &HeapTerm) -> Result<(), EnvError> {
        match t {
            HeapTerm::Conj(l, r) | HeapTerm::Disj(l, r) => {
                self.check_calls(l)?;
                self.check_calls(r)
            }
            HeapTerm::Inv(t) => self.check_calls(t),
            HeapTerm::Call(call) => {
                self.predicate(call)?;
                for a in &call.args {
                    if let Arg::Term(t) = a {
                        self.check_calls(t)?;
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}
