use std::collections::BTreeSet;

use crate::env::Env;
use crate::graph::{
    edges_in_context, first_conflict, BuildError, Edge, HeapGraph, Unsat, UnsatReason, VertexId,
};
use crate::term::{Heaplet, Location, Value};

fn merged_env(a: &HeapGraph, b: &HeapGraph) -> Env {
    let mut env = Env::new();
    a.class_env(&mut env);
    b.class_env(&mut env);
    env
}

fn union(a: &HeapGraph, b: &HeapGraph) -> HeapGraph {
    let ids: BTreeSet<VertexId> = a
        .vertices()
        .keys()
        .chain(b.vertices().keys())
        .cloned()
        .collect();
    let edges = a.edges().iter().chain(b.edges()).cloned();
    HeapGraph::from_parts(ids, edges, &merged_env(a, b))
}

fn touching(g: &HeapGraph, v: &VertexId) -> Vec<Heaplet> {
    g.edges()
        .iter()
        .find(|e| &e.src == v || &e.dst == v)
        .map(|e| vec![e.to_heaplet()])
        .unwrap_or_default()
}

/// Strict conjunction: the graphs must share a vertex, and their union must
/// stay simple and non-repetitive.
pub fn conjoin(h1: &HeapGraph, h2: &HeapGraph) -> Result<HeapGraph, Unsat> {
    if h1.is_empty() {
        return Ok(h2.clone());
    }
    if h2.is_empty() {
        return Ok(h1.clone());
    }
    let edges: Vec<Edge> = h1.edges().iter().chain(h2.edges()).cloned().collect();
    if let Some((j, i, reason)) = first_conflict(&edges) {
        return Err(Unsat::new(
            reason,
            vec![edges[j].to_heaplet(), edges[i].to_heaplet()],
        ));
    }
    if !h1.vertices().keys().any(|v| h2.contains(v)) {
        let first = |g: &HeapGraph| g.edges().iter().next().map(Edge::to_heaplet);
        let witness = [first(h1), first(h2)].into_iter().flatten().collect();
        return Err(Unsat::new(UnsatReason::NotConnectible, witness));
    }
    Ok(union(h1, h2))
}

/// Strict disjunction: no shared vertex, hence no path between the parts.
pub fn disjoin(h1: &HeapGraph, h2: &HeapGraph) -> Result<HeapGraph, Unsat> {
    if let Some(v) = h1.vertices().keys().find(|v| h2.contains(v)) {
        let mut witness = touching(h1, v);
        witness.extend(touching(h2, v));
        return Err(Unsat::new(UnsatReason::Interference, witness));
    }
    Ok(union(h1, h2))
}

/// Adds one heaplet to a graph. Field paths of `a` may run through slots
/// already present in `h`.
pub fn conjoin_heaplet(
    h: &HeapGraph,
    a: Location,
    b: Value,
    env: &Env,
) -> Result<HeapGraph, BuildError> {
    let edges = edges_in_context(&[Heaplet::new(a, b)], h)?;
    if let Some((j, i, reason)) = first_conflict(&edges) {
        return Err(Unsat::new(reason, vec![edges[j].to_heaplet(), edges[i].to_heaplet()]).into());
    }
    let single = HeapGraph::from_parts([], edges, env);
    Ok(conjoin(h, &single)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;
    use crate::term::parse_heap;

    fn g(src: &str) -> HeapGraph {
        build_graph(&parse_heap(src).unwrap(), &Env::default()).unwrap()
    }

    fn add(h: &HeapGraph, a: &str, b: &str) -> Result<HeapGraph, BuildError> {
        conjoin_heaplet(h, Location::from_dotted(a), Value::sym(b), &Env::default())
    }

    fn reason(r: Result<HeapGraph, BuildError>) -> UnsatReason {
        match r {
            Err(BuildError::Unsat(u)) => u.reason,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn conjoin_heaplet_cases() {
        assert_eq!(add(&HeapGraph::empty(), "a", "b").unwrap(), g("a |-> b"));
        assert_eq!(
            add(&g("a |-> b"), "b", "c").unwrap(),
            g("a |-> b * b |-> c")
        );
        assert_eq!(
            reason(add(&g("a |-> b"), "a", "d")),
            UnsatReason::DuplicateSource
        );
        assert_eq!(
            reason(add(&g("a |-> b"), "a", "b")),
            UnsatReason::DuplicateHeaplet
        );
        assert_eq!(
            reason(add(&g("a |-> b"), "c", "d")),
            UnsatReason::NotConnectible
        );
    }

    #[test]
    fn conjoin_graph_cases() {
        let ab = g("a |-> b");
        assert_eq!(conjoin(&HeapGraph::empty(), &ab).unwrap(), ab);
        assert_eq!(conjoin(&ab, &g("b |-> c")).unwrap(), g("a |-> b * b |-> c"));
        assert_eq!(
            conjoin(&ab, &g("c |-> d")).unwrap_err().reason,
            UnsatReason::NotConnectible
        );
    }

    #[test]
    fn disjoin_cases() {
        let two = disjoin(&g("d |-> a"), &g("c |-> b")).unwrap();
        assert_eq!(two.connected_components().len(), 2);
        assert_eq!(disjoin(&two, &HeapGraph::empty()).unwrap(), two);
        assert_eq!(
            disjoin(&g("x.b |-> y"), &g("x.c |-> z"))
                .unwrap_err()
                .reason,
            UnsatReason::Interference
        );
    }

    #[test]
    fn path_through_existing_slot() {
        let h = g("a.f |-> y");
        let out = add(&h, "a.f.g", "x").unwrap();
        assert_eq!(out, g("a.f |-> y * y.g |-> x"));
    }
}
