//! Reader for `.heap` files: class, object, predicate and goal declarations.
//!
//! ```text
//! class Node { value, next }
//! class Pair extends Node { private value, other }
//! obj n : Node;
//! pred list(x) := nil \/ exists y: x.next |-> y * list(y);
//! goal g := n.value |-> 3 * true(n);
//! ```

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::env::{ClassDecl, Clause, Env, EnvError, PredicateDef};
use crate::term::{ExtTerm, HeapTerm, Parser, SyntaxError, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Goal {
    pub name: String,
    pub term: ExtTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Workspace {
    pub env: Env,
    pub goals: Vec<Goal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

impl Workspace {
    pub fn goal(&self, name: &str) -> Option<&Goal> {
        self.goals.iter().find(|g| g.name == name)
    }
}

const VISIBILITY: &[&str] = &["public", "protected", "private"];

struct Reader {
    p: Parser,
    ws: Workspace,
    // Declared visibility of every field, per class.
    visibility: BTreeMap<String, Vec<(String, String)>>,
}

fn duplicate(kind: &'static str, name: &str) -> LoadError {
    EnvError::Duplicate {
        kind,
        name: name.to_string(),
    }
    .into()
}

impl Reader {
    fn keyword(&mut self, word: &str) -> bool {
        if self.p.is_keyword(word) {
            self.p.advance();
            true
        } else {
            false
        }
    }

    fn item(&mut self) -> Result<(), LoadError> {
        if self.keyword("class") {
            self.class()
        } else if self.keyword("obj") {
            self.object()
        } else if self.keyword("pred") {
            self.predicate()
        } else if self.keyword("goal") {
            self.goal()
        } else {
            Err(self
                .p
                .error(&["`class`", "`obj`", "`pred`", "`goal`"])
                .into())
        }
    }

    fn class(&mut self) -> Result<(), LoadError> {
        let name = self.p.ident()?;
        if self.ws.env.classes.contains_key(&name) {
            return Err(duplicate("class", &name));
        }
        let base = if self.keyword("extends") {
            let b = self.p.ident()?;
            if !self.ws.env.classes.contains_key(&b) {
                return Err(EnvError::UnknownClass(b).into());
            }
            Some(b)
        } else {
            None
        };
        self.p.expect(TokenKind::LBrace)?;
        let mut own: Vec<(String, String)> = Vec::new();
        while self.p.peek() != &TokenKind::RBrace {
            let vis = VISIBILITY
                .iter()
                .find(|v| self.p.is_keyword(v))
                .map(|v| v.to_string());
            if vis.is_some() {
                self.p.advance();
            }
            let field = self.p.ident()?;
            if own.iter().any(|(f, _)| *f == field) {
                return Err(duplicate("field", &format!("{name}.{field}")));
            }
            own.push((field, vis.unwrap_or_else(|| "public".into())));
            if !self.p.eat(&TokenKind::Comma) {
                break;
            }
        }
        self.p.expect(TokenKind::RBrace)?;
        self.p.eat(&TokenKind::Semi);

        let mut fields: Vec<(String, String)> = Vec::new();
        if let Some(b) = &base {
            let own_names: BTreeSet<&String> = own.iter().map(|(f, _)| f).collect();
            for (f, vis) in &self.visibility[b] {
                let f = if own_names.contains(f) {
                    format!("{b}${vis}${f}")
                } else {
                    f.clone()
                };
                fields.push((f, vis.clone()));
            }
        }
        fields.extend(own);
        let decl = ClassDecl {
            name: name.clone(),
            fields: fields.iter().map(|(f, _)| f.clone()).collect(),
        };
        self.ws.env.classes.insert(name.clone(), decl);
        self.visibility.insert(name, fields);
        Ok(())
    }

    fn object(&mut self) -> Result<(), LoadError> {
        let obj = self.p.ident()?;
        self.p.expect(TokenKind::Colon)?;
        let class = self.p.ident()?;
        self.p.expect(TokenKind::Semi)?;
        if self.ws.env.typings.insert(obj.clone(), class).is_some() {
            return Err(duplicate("object", &obj));
        }
        Ok(())
    }

    fn heap_body(&mut self) -> Result<HeapTerm, LoadError> {
        if self.p.is_keyword("nil")
            && matches!(self.p.peek_at(1), TokenKind::Wedge | TokenKind::Semi)
        {
            self.p.advance();
            return Ok(HeapTerm::Emp);
        }
        let span = self.p.span();
        self.p.parse_ext()?.into_heap().ok_or_else(|| {
            SyntaxError::new(span, vec!["heap term".into()], "logical formula".into()).into()
        })
    }

    fn predicate(&mut self) -> Result<(), LoadError> {
        let name = self.p.ident()?;
        self.p.expect(TokenKind::LParen)?;
        let mut params = Vec::new();
        if !self.p.eat(&TokenKind::RParen) {
            loop {
                params.push(self.p.ident()?);
                if self.p.eat(&TokenKind::RParen) {
                    break;
                }
                self.p.expect(TokenKind::Comma)?;
            }
        }
        self.p.expect(TokenKind::Define)?;
        let mut clauses = Vec::new();
        loop {
            let mut exists = Vec::new();
            if self.keyword("exists") {
                loop {
                    exists.push(self.p.ident()?);
                    if self.p.eat(&TokenKind::Colon) {
                        break;
                    }
                    self.p.expect(TokenKind::Comma)?;
                }
            }
            let body = self.heap_body()?;
            clauses.push(Clause { exists, body });
            if !self.p.eat(&TokenKind::Wedge) {
                break;
            }
        }
        self.p.expect(TokenKind::Semi)?;
        if self.ws.env.predicates.contains_key(&name) {
            return Err(duplicate("predicate", &name));
        }
        self.ws.env.add_predicate(PredicateDef {
            name,
            params,
            clauses,
        });
        Ok(())
    }

    fn goal(&mut self) -> Result<(), LoadError> {
        let name = self.p.ident()?;
        self.p.expect(TokenKind::Define)?;
        let term = self.p.parse_ext()?;
        self.p.expect(TokenKind::Semi)?;
        if self.ws.goal(&name).is_some() {
            return Err(duplicate("goal", &name));
        }
        self.ws.goals.push(Goal { name, term });
        Ok(())
    }
}

/// Parses and validates a workspace file.
pub fn load(src: &str) -> Result<Workspace, LoadError> {
    let mut r = Reader {
        p: Parser::new(src)?,
        ws: Workspace::default(),
        visibility: BTreeMap::new(),
    };
    while !r.p.at_eof() {
        r.item()?;
    }
    r.ws.env.validate()?;
    for g in &r.ws.goals {
        for call in g.term.calls() {
            r.ws.env.predicate(call)?;
        }
    }
    Ok(r.ws)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_all_declarations() {
        let ws = load(
            "// sample\n\
             class A { f1, g1, g2 }\n\
             obj a : A;\n\
             pred tree(l) := nil \\/ exists x, y: l |-> (left: x, right: y) * tree(x) * tree(y);\n\
             goal g1 := a.f1 |-> x * true(a);\n\
             goal g2 := tree(r) | emp;",
        )
        .unwrap();
        assert_eq!(ws.env.fields_of("a").unwrap(), ["f1", "g1", "g2"]);
        let tree = &ws.env.predicates["tree"];
        assert_eq!(tree.clauses.len(), 2);
        assert_eq!(tree.clauses[0].body, HeapTerm::Emp);
        assert_eq!(tree.clauses[1].exists, vec!["x", "y"]);
        assert_eq!(ws.goals.len(), 2);
    }

    #[test]
    fn clashing_base_fields_are_mangled() {
        let ws = load("class B { private f, g } class D extends B { f, h }").unwrap();
        assert_eq!(ws.env.classes["D"].fields, ["B$private$f", "g", "f", "h"]);
    }

    #[test]
    fn rejects_duplicates_and_unknowns() {
        assert!(load("goal g := emp; goal g := emp;").is_err());
        assert!(load("class C { f, f }").is_err());
        assert!(load("obj a : Missing;").is_err());
        assert!(load("goal g := p(a);").is_err());
        assert!(load("pred p(x) := x |-> 1; goal g := p(a, b);").is_err());
    }

    #[test]
    fn syntax_errors_carry_position() {
        match load("goal g := a |-> ;") {
            Err(LoadError::Syntax(e)) => assert_eq!((e.span.line, e.span.column), (1, 17)),
            other => panic!("{other:?}"),
        }
    }
}
