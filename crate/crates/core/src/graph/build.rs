use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::{Edge, HeapGraph, VertexId};
use crate::algebra::{dnf, AlgebraError};
use crate::env::Env;
use crate::term::{HeapTerm, Heaplet, Location, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnsatReason {
    DuplicateHeaplet,
    DuplicateSource,
    NotConnectible,
    Interference,
    ExplicitFalse,
}

impl fmt::Display for UnsatReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnsatReason::DuplicateHeaplet => "duplicate-heaplet",
            UnsatReason::DuplicateSource => "duplicate-source",
            UnsatReason::NotConnectible => "not-connectible",
            UnsatReason::Interference => "interference",
            UnsatReason::ExplicitFalse => "explicit-false",
        })
    }
}

/// A contradiction together with the heaplets that exhibit it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Unsat {
    pub reason: UnsatReason,
    pub witness: Vec<Heaplet>,
}

impl Unsat {
    pub fn new(reason: UnsatReason, witness: Vec<Heaplet>) -> Self {
        Unsat { reason, witness }
    }
}

impl fmt::Display for Unsat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.reason)?;
        if !self.witness.is_empty() {
            let ws: Vec<String> = self.witness.iter().map(|h| h.to_string()).collect();
            write!(f, ": {}", ws.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("unsatisfiable ({0})")]
    Unsat(Unsat),
    #[error("partial constants or predicate calls need unfolding: {0}")]
    NeedsEnv(String),
    #[error("inverse heaps must be cancelled first: {0}")]
    NotGround(String),
    #[error("class `{class}` of `{object}` has no field `{field}`")]
    UnknownField {
        object: String,
        class: String,
        field: String,
    },
    #[error("`{0}` accesses a field of a non-object value")]
    InvalidPath(Location),
}

impl From<Unsat> for BuildError {
    fn from(u: Unsat) -> Self {
        BuildError::Unsat(u)
    }
}

type SlotMap = BTreeMap<(VertexId, String), VertexId>;

/// The vertex a location denotes when used as an object or a value.
fn object_vertex(loc: &Location, slots: &SlotMap) -> Result<VertexId, BuildError> {
    let Some((prefix, field)) = loc.split_last() else {
        return Ok(VertexId::Named(loc.root.clone()));
    };
    let base = object_vertex(&prefix, slots)?;
    if matches!(base, VertexId::Lit { .. } | VertexId::Nil) {
        return Err(BuildError::InvalidPath(loc.clone()));
    }
    Ok(slots
        .get(&(base, field.to_string()))
        .cloned()
        .unwrap_or_else(|| VertexId::Named(loc.to_string())))
}

fn edge_of(h: &Heaplet, slots: &SlotMap) -> Result<Edge, BuildError> {
    let (src, slot) = match h.loc.split_last() {
        None => (VertexId::Named(h.loc.root.clone()), None),
        Some((prefix, field)) => {
            let src = object_vertex(&prefix, slots)?;
            if matches!(src, VertexId::Lit { .. } | VertexId::Nil) {
                return Err(BuildError::InvalidPath(h.loc.clone()));
            }
            (src, Some(field.to_string()))
        }
    };
    let owner = {
        let base = src
            .as_location()
            .expect("sources are named or placeholders");
        match &slot {
            Some(s) => base.dot(s),
            None => base,
        }
        .to_string()
    };
    let dst = match &h.val {
        Value::Lit(n) => VertexId::Lit { owner, value: *n },
        Value::Nil => VertexId::Nil,
        v if v.is_placeholder() => VertexId::Placeholder { owner },
        Value::Sym(loc) => object_vertex(loc, slots)?,
        Value::Record(_) => unreachable!("records are expanded before resolution"),
    };
    Ok(Edge { src, slot, dst })
}

/// Resolves field paths against the slots defined by the heaplets
/// themselves, iterating until the edge set is stable.
fn resolve(heaplets: &[Heaplet]) -> Result<Vec<Edge>, BuildError> {
    resolve_with(heaplets, &SlotMap::new())
}

fn resolve_with(heaplets: &[Heaplet], seed: &SlotMap) -> Result<Vec<Edge>, BuildError> {
    let mut edges: Vec<Edge> = Vec::new();
    for _ in 0..=heaplets.len() {
        let mut slots = seed.clone();
        for e in &edges {
            if let Some(s) = &e.slot {
                slots
                    .entry((e.src.clone(), s.clone()))
                    .or_insert_with(|| e.dst.clone());
            }
        }
        let next = heaplets
            .iter()
            .map(|h| edge_of(h, &slots))
            .collect::<Result<Vec<_>, _>>()?;
        if next == edges {
            break;
        }
        edges = next;
    }
    Ok(edges)
}

/// Edges of new heaplets whose paths may run through slots of `context`.
pub(crate) fn edges_in_context(
    heaplets: &[Heaplet],
    context: &HeapGraph,
) -> Result<Vec<Edge>, BuildError> {
    let seed: SlotMap = context
        .edges()
        .iter()
        .filter_map(|e| Some(((e.src.clone(), e.slot.clone()?), e.dst.clone())))
        .collect();
    resolve_with(&expand_all(heaplets), &seed)
}

fn expand_all(heaplets: &[Heaplet]) -> Vec<Heaplet> {
    heaplets.iter().flat_map(Heaplet::expand).collect()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Groups heaplet indices into weakly connected components, ordered by
/// first index. Source conflicts are not checked.
pub fn scope_components(heaplets: &[Heaplet]) -> Result<Vec<Vec<usize>>, BuildError> {
    let edges = resolve(heaplets)?;
    Ok(edge_components(&edges))
}

fn edge_components(edges: &[Edge]) -> Vec<Vec<usize>> {
    let mut ids: BTreeMap<&VertexId, usize> = BTreeMap::new();
    for e in edges {
        let n = ids.len();
        ids.entry(&e.src).or_insert(n);
        let n = ids.len();
        ids.entry(&e.dst).or_insert(n);
    }
    let mut uf = UnionFind::new(ids.len());
    for e in edges {
        uf.union(ids[&e.src], ids[&e.dst]);
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        let root = uf.find(ids[&e.src]);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, g)) => g.push(i),
            None => groups.push((root, vec![i])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

fn check_fields(edges: &[Edge], env: &Env) -> Result<(), BuildError> {
    for e in edges {
        if let (VertexId::Named(obj), Some(slot)) = (&e.src, &e.slot) {
            if let Some(class) = env.class_of(obj) {
                if !class.fields.contains(slot) {
                    return Err(BuildError::UnknownField {
                        object: obj.clone(),
                        class: class.name.clone(),
                        field: slot.clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// First pair of edges violating non-repetitiveness or simplicity.
pub(crate) fn first_conflict(edges: &[Edge]) -> Option<(usize, usize, UnsatReason)> {
    for i in 0..edges.len() {
        for j in 0..i {
            let (a, b) = (&edges[j], &edges[i]);
            if a == b {
                return Some((j, i, UnsatReason::DuplicateHeaplet));
            }
            if a.src == b.src && (a.slot == b.slot || a.slot.is_none() || b.slot.is_none()) {
                return Some((j, i, UnsatReason::DuplicateSource));
            }
        }
    }
    None
}

/// Materializes one `*`-scope. Heaplets are expanded first; the result is
/// the expanded heaplets paired with their edges.
pub fn build_scope(
    heaplets: &[Heaplet],
    env: &Env,
    require_connected: bool,
) -> Result<Vec<(Heaplet, Edge)>, BuildError> {
    let hs = expand_all(heaplets);
    let edges = resolve(&hs)?;
    check_fields(&edges, env)?;
    if let Some((j, i, reason)) = first_conflict(&edges) {
        return Err(Unsat::new(reason, vec![hs[j].clone(), hs[i].clone()]).into());
    }
    if require_connected {
        let comps = edge_components(&edges);
        if comps.len() > 1 {
            let witness = vec![hs[comps[0][0]].clone(), hs[comps[1][0]].clone()];
            return Err(Unsat::new(UnsatReason::NotConnectible, witness).into());
        }
    }
    Ok(hs.into_iter().zip(edges).collect())
}

/// Builds the heap graph of a ground term: every `||`-alternative of the
/// distributed term is one connected scope, and scopes share no vertex.
pub fn build_graph(t: &HeapTerm, env: &Env) -> Result<HeapGraph, BuildError> {
    if t.has_partial() || t.has_call() {
        return Err(BuildError::NeedsEnv(t.to_string()));
    }
    if t.has_inverse() {
        return Err(BuildError::NotGround(t.to_string()));
    }
    let scopes = dnf(t).map_err(|e| match e {
        AlgebraError::NeedsEnv(s) => BuildError::NeedsEnv(s),
        other => BuildError::NotGround(other.to_string()),
    })?;
    let mut built: Vec<Vec<(Heaplet, Edge)>> = Vec::new();
    for scope in &scopes {
        if scope.falsum {
            return Err(Unsat::new(UnsatReason::ExplicitFalse, Vec::new()).into());
        }
        let hs: Vec<Heaplet> = scope.items.iter().map(|(h, _)| h.clone()).collect();
        built.push(build_scope(&hs, env, !scope.open)?);
    }
    let mut owner: BTreeMap<&VertexId, &Heaplet> = BTreeMap::new();
    for scope in &built {
        let mut local: BTreeMap<&VertexId, &Heaplet> = BTreeMap::new();
        for (h, e) in scope {
            for v in [&e.src, &e.dst] {
                if let Some(prev) = owner.get(v) {
                    let witness = vec![(*prev).clone(), h.clone()];
                    return Err(Unsat::new(UnsatReason::Interference, witness).into());
                }
                local.entry(v).or_insert(h);
            }
        }
        owner.extend(local);
    }
    let edges: BTreeSet<Edge> = built.into_iter().flatten().map(|(_, e)| e).collect();
    Ok(HeapGraph::from_parts([], edges, env))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_heap;

    fn build(src: &str) -> Result<HeapGraph, BuildError> {
        build_graph(&parse_heap(src).unwrap(), &Env::default())
    }

    fn reason(src: &str) -> UnsatReason {
        match build(src) {
            Err(BuildError::Unsat(u)) => u.reason,
            other => panic!("{src}: {other:?}"),
        }
    }

    #[test]
    fn single_heaplet_has_root_and_cell() {
        let g = build("a |-> 5").unwrap();
        assert_eq!(g.vertices().len(), 2);
        assert_eq!(g.edges().len(), 1);
        assert_eq!(g.roots(), [VertexId::named("a")].into_iter().collect());
    }

    #[test]
    fn contradictory_conjunctions() {
        assert_eq!(reason("a |-> 5 * b |-> 5"), UnsatReason::NotConnectible);
        assert_eq!(reason("a |-> b * a |-> d"), UnsatReason::DuplicateSource);
        assert_eq!(reason("a |-> b * a |-> b"), UnsatReason::DuplicateHeaplet);
        assert_eq!(reason("a |-> b * c |-> d"), UnsatReason::NotConnectible);
        assert_eq!(reason("x.b |-> _ || x.c |-> _"), UnsatReason::Interference);
        assert_eq!(reason("a |-> b * false"), UnsatReason::ExplicitFalse);
    }

    #[test]
    fn alias_shares_target() {
        let g = build("x |-> z * y |-> z").unwrap();
        assert_eq!(g.vertices().len(), 3);
        assert_eq!(g.connected_components().len(), 1);
    }

    #[test]
    fn nested_paths_follow_defined_slots() {
        let g = build("a.f |-> y * a.f.g |-> x").unwrap();
        assert!(g.edges().contains(&Edge::new(
            VertexId::named("y"),
            Some("g"),
            VertexId::named("x")
        )));
        let h = build("a.f.g |-> x * a.f |-> y").unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn record_value_is_one_edge_per_field() {
        let g = build("l |-> (left: x, right: nil)").unwrap();
        assert_eq!(g.edges().len(), 2);
    }

    #[test]
    fn mixing_simple_and_field_edges_is_a_duplicate_source() {
        assert_eq!(reason("a |-> b * a.f |-> c"), UnsatReason::DuplicateSource);
    }

    #[test]
    fn field_of_literal_is_rejected() {
        assert!(matches!(
            build("a.f |-> 3 * a.f.g |-> x"),
            Err(BuildError::InvalidPath(_))
        ));
    }

    #[test]
    fn partials_need_env() {
        assert!(matches!(build("true(a)"), Err(BuildError::NeedsEnv(_))));
        assert!(matches!(
            build("inv(a |-> b)"),
            Err(BuildError::NotGround(_))
        ));
    }

    #[test]
    fn unknown_field_of_typed_object() {
        let mut env = Env::new();
        env.add_class("C", &["f"]).add_typing("o", "C");
        let t = parse_heap("o.g |-> x").unwrap();
        assert!(matches!(
            build_graph(&t, &env),
            Err(BuildError::UnknownField { .. })
        ));
    }

    #[test]
    fn open_scope_skips_connectivity() {
        assert!(build("a |-> b * c |-> d * true").is_ok());
    }
}
