//! Finite heap graphs materialized from ground heap terms.

mod build;
mod dot;
mod midpoint;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::env::Env;
use crate::term::{HeapTerm, Heaplet, Location, Value, PLACEHOLDER};

pub use build::{build_graph, build_scope, scope_components, BuildError, Unsat, UnsatReason};
pub(crate) use build::{edges_in_context, first_conflict};
pub use dot::to_dot;
pub use midpoint::{from_vertex_centric, to_vertex_centric, Link, LinkRole, MidpointGraph};

/// Vertex identity. Names are shared between locations and symbols;
/// literals and placeholders are private to the location holding them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum VertexId {
    Named(String),
    Lit { owner: String, value: i64 },
    Placeholder { owner: String },
    Nil,
}

impl VertexId {
    pub fn named(name: impl Into<String>) -> Self {
        VertexId::Named(name.into())
    }

    /// The value a heaplet must carry to point at this vertex.
    pub fn as_value(&self) -> Value {
        match self {
            VertexId::Named(n) => Value::Sym(Location::from_dotted(n)),
            VertexId::Lit { value, .. } => Value::Lit(*value),
            VertexId::Placeholder { .. } => Value::placeholder(),
            VertexId::Nil => Value::Nil,
        }
    }

    /// The location path naming this vertex, if it can own fields.
    pub fn as_location(&self) -> Option<Location> {
        match self {
            VertexId::Named(n) => Some(Location::from_dotted(n)),
            VertexId::Placeholder { owner } => Some(Location::from_dotted(owner)),
            _ => None,
        }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Named(n) => f.write_str(n),
            VertexId::Lit { owner, value } => write!(f, "{value}@{owner}"),
            VertexId::Placeholder { owner } => write!(f, "{PLACEHOLDER}@{owner}"),
            VertexId::Nil => f.write_str("nil"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum VertexKind {
    /// A named vertex without incoming edges.
    StackRoot(String),
    Cell(String),
    Object {
        class: Option<String>,
        slots: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Edge {
    pub src: VertexId,
    pub slot: Option<String>,
    pub dst: VertexId,
}

impl Edge {
    pub fn new(src: VertexId, slot: Option<&str>, dst: VertexId) -> Self {
        Edge {
            src,
            slot: slot.map(str::to_string),
            dst,
        }
    }

    pub fn simple(src: &str, dst: &str) -> Self {
        Edge::new(VertexId::named(src), None, VertexId::named(dst))
    }

    /// The heaplet denoting this edge.
    pub fn to_heaplet(&self) -> Heaplet {
        let base = self
            .src
            .as_location()
            .unwrap_or_else(|| Location::var(self.src.to_string()));
        let loc = match &self.slot {
            Some(s) => base.dot(s),
            None => base,
        };
        Heaplet::new(loc, self.dst.as_value())
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.slot {
            Some(s) => write!(f, "{} -{}-> {}", self.src, s, self.dst),
            None => write!(f, "{} -> {}", self.src, self.dst),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(VertexId),
    #[error("unknown edge `{0}`")]
    UnknownEdge(Edge),
    #[error("malformed midpoint graph: {0}")]
    MalformedMidpointGraph(String),
}

/// Selector for the reachability built-ins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VertexSel {
    One(VertexId),
    Set(BTreeSet<VertexId>),
}

impl VertexSel {
    fn ids(&self) -> Vec<&VertexId> {
        match self {
            VertexSel::One(v) => vec![v],
            VertexSel::Set(s) => s.iter().collect(),
        }
    }
}

impl From<VertexId> for VertexSel {
    fn from(v: VertexId) -> Self {
        VertexSel::One(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct HeapGraph {
    vertices: BTreeMap<VertexId, VertexKind>,
    edges: BTreeSet<Edge>,
}

impl HeapGraph {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Assembles a graph and derives vertex kinds; typed objects take their
    /// class layout from `env`.
    pub fn from_parts(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = Edge>,
        env: &Env,
    ) -> Self {
        let edges: BTreeSet<Edge> = edges.into_iter().collect();
        let mut ids: BTreeSet<VertexId> = vertices.into_iter().collect();
        for e in &edges {
            ids.insert(e.src.clone());
            ids.insert(e.dst.clone());
        }
        let mut incoming = BTreeSet::new();
        let mut slots: BTreeMap<&VertexId, BTreeSet<&str>> = BTreeMap::new();
        for e in &edges {
            incoming.insert(&e.dst);
            if let Some(s) = &e.slot {
                slots.entry(&e.src).or_default().insert(s);
            }
        }
        let vertices = ids
            .iter()
            .map(|id| {
                let kind = if let Some(used) = slots.get(id) {
                    let decl = match id {
                        VertexId::Named(n) => env.class_of(n),
                        _ => None,
                    };
                    VertexKind::Object {
                        class: decl.map(|c| c.name.clone()),
                        slots: match decl {
                            Some(c) => c.fields.clone(),
                            None => used.iter().map(|s| s.to_string()).collect(),
                        },
                    }
                } else {
                    match id {
                        VertexId::Named(n) if !incoming.contains(id) => {
                            VertexKind::StackRoot(n.clone())
                        }
                        VertexId::Named(n) => VertexKind::Cell(n.clone()),
                        VertexId::Lit { value, .. } => VertexKind::Cell(value.to_string()),
                        VertexId::Placeholder { .. } => VertexKind::Cell(PLACEHOLDER.into()),
                        VertexId::Nil => VertexKind::Cell("nil".into()),
                    }
                };
                (id.clone(), kind)
            })
            .collect();
        HeapGraph { vertices, edges }
    }

    /// Graph from edges alone, without class information.
    pub fn from_edges(edges: impl IntoIterator<Item = Edge>) -> Self {
        Self::from_parts([], edges, &Env::default())
    }

    pub fn vertices(&self) -> &BTreeMap<VertexId, VertexKind> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.vertices.contains_key(v)
    }

    /// Outgoing edge of `src` at `slot`.
    pub fn target(&self, src: &VertexId, slot: Option<&str>) -> Option<&VertexId> {
        self.edges
            .iter()
            .find(|e| &e.src == src && e.slot.as_deref() == slot)
            .map(|e| &e.dst)
    }

    /// Named vertices without incoming edges.
    pub fn roots(&self) -> BTreeSet<VertexId> {
        let incoming: BTreeSet<&VertexId> = self.edges.iter().map(|e| &e.dst).collect();
        self.vertices
            .keys()
            .filter(|v| matches!(v, VertexId::Named(_)) && !incoming.contains(v))
            .cloned()
            .collect()
    }

    fn successors(&self) -> BTreeMap<&VertexId, Vec<&VertexId>> {
        let mut succ: BTreeMap<&VertexId, Vec<&VertexId>> = BTreeMap::new();
        for e in &self.edges {
            succ.entry(&e.src).or_default().push(&e.dst);
        }
        succ
    }

    fn reachable_from<'a>(
        &'a self,
        starts: impl IntoIterator<Item = &'a VertexId>,
    ) -> BTreeSet<&'a VertexId> {
        let succ = self.successors();
        let mut seen: BTreeSet<&VertexId> = BTreeSet::new();
        let mut queue: VecDeque<&VertexId> = starts.into_iter().collect();
        while let Some(v) = queue.pop_front() {
            if seen.insert(v) {
                queue.extend(succ.get(v).into_iter().flatten().copied());
            }
        }
        seen
    }

    /// Vertices not reachable from any root.
    pub fn garbage(&self) -> BTreeSet<VertexId> {
        let roots = self.roots();
        let live = self.reachable_from(roots.iter());
        self.vertices
            .keys()
            .filter(|v| !live.contains(v))
            .cloned()
            .collect()
    }

    /// Components lacking a root of their own.
    pub fn rootless_components(&self) -> Vec<BTreeSet<VertexId>> {
        let roots = self.roots();
        self.connected_components()
            .into_iter()
            .filter(|c| c.is_disjoint(&roots))
            .collect()
    }

    /// True iff some source has a path to some target; the empty path counts.
    pub fn reaches(&self, from: &VertexSel, to: &VertexSel) -> Result<bool, GraphError> {
        for v in from.ids().into_iter().chain(to.ids()) {
            if !self.contains(v) {
                return Err(GraphError::UnknownVertex(v.clone()));
            }
        }
        let reached = self.reachable_from(from.ids());
        Ok(to.ids().into_iter().any(|v| reached.contains(v)))
    }

    /// Weakly connected components ordered by least vertex.
    pub fn connected_components(&self) -> Vec<BTreeSet<VertexId>> {
        let mut adj: BTreeMap<&VertexId, Vec<&VertexId>> = BTreeMap::new();
        for e in &self.edges {
            adj.entry(&e.src).or_default().push(&e.dst);
            adj.entry(&e.dst).or_default().push(&e.src);
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for v in self.vertices.keys() {
            if seen.contains(v) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut stack = vec![v];
            while let Some(u) = stack.pop() {
                if seen.insert(u) {
                    comp.insert(u.clone());
                    stack.extend(adj.get(u).into_iter().flatten().copied());
                }
            }
            out.push(comp);
        }
        out
    }

    /// Edges whose removal splits a weakly connected component.
    pub fn bridges(&self) -> BTreeSet<Edge> {
        let index: BTreeMap<&VertexId, usize> = self
            .vertices
            .keys()
            .enumerate()
            .map(|(i, v)| (v, i))
            .collect();
        let edges: Vec<&Edge> = self.edges.iter().collect();
        let n = index.len();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            let (a, b) = (index[&e.src], index[&e.dst]);
            if a != b {
                adj[a].push((b, k));
                adj[b].push((a, k));
            }
        }
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut timer = 0;
        let mut out = BTreeSet::new();
        for start in 0..n {
            if disc[start] != usize::MAX {
                continue;
            }
            // Iterative lowlink search; frames are (vertex, parent edge, next neighbour).
            let mut stack = vec![(start, usize::MAX, 0usize)];
            disc[start] = timer;
            low[start] = timer;
            timer += 1;
            while let Some(&mut (v, parent_edge, ref mut next)) = stack.last_mut() {
                if *next < adj[v].len() {
                    let (w, k) = adj[v][*next];
                    *next += 1;
                    if k == parent_edge {
                        continue;
                    }
                    if disc[w] == usize::MAX {
                        disc[w] = timer;
                        low[w] = timer;
                        timer += 1;
                        stack.push((w, k, 0));
                    } else {
                        low[v] = low[v].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(u, _, _)) = stack.last() {
                        low[u] = low[u].min(low[v]);
                        if low[v] > disc[u] {
                            out.insert(edges[parent_edge].clone());
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_bridge(&self, e: &Edge) -> Result<bool, GraphError> {
        if !self.edges.contains(e) {
            return Err(GraphError::UnknownEdge(e.clone()));
        }
        Ok(self.bridges().contains(e))
    }

    /// Sub-graph relation by identity of vertices and edges.
    pub fn is_subheap_of(&self, other: &HeapGraph) -> bool {
        self.vertices.keys().all(|v| other.contains(v)) && self.edges.is_subset(&other.edges)
    }

    /// The graph restricted to one vertex set.
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> HeapGraph {
        HeapGraph {
            vertices: self
                .vertices
                .iter()
                .filter(|(v, _)| keep.contains(v))
                .map(|(v, k)| (v.clone(), k.clone()))
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|e| keep.contains(&e.src) && keep.contains(&e.dst))
                .cloned()
                .collect(),
        }
    }

    /// Class layouts recorded on object vertices, as an environment.
    pub(crate) fn class_env(&self, env: &mut Env) {
        for (v, kind) in &self.vertices {
            if let (
                VertexId::Named(n),
                VertexKind::Object {
                    class: Some(c),
                    slots,
                },
            ) = (v, kind)
            {
                let fields: Vec<&str> = slots.iter().map(String::as_str).collect();
                env.add_class(c, &fields).add_typing(n, c);
            }
        }
    }

    pub(crate) fn from_raw(
        vertices: BTreeMap<VertexId, VertexKind>,
        edges: BTreeSet<Edge>,
    ) -> Self {
        HeapGraph { vertices, edges }
    }
}

pub fn reaches(g: &HeapGraph, from: &VertexSel, to: &VertexSel) -> Result<bool, GraphError> {
    g.reaches(from, to)
}

pub fn connected_components(g: &HeapGraph) -> Vec<BTreeSet<VertexId>> {
    g.connected_components()
}

pub fn is_bridge(g: &HeapGraph, e: &Edge) -> Result<bool, GraphError> {
    g.is_bridge(e)
}

pub fn subheap(g1: &HeapGraph, g2: &HeapGraph) -> bool {
    g1.is_subheap_of(g2)
}

/// Heaplets of one component in canonical order.
pub fn component_heaplets(g: &HeapGraph, comp: &BTreeSet<VertexId>) -> Vec<Heaplet> {
    let mut hs: Vec<Heaplet> = g
        .edges
        .iter()
        .filter(|e| comp.contains(&e.src))
        .map(Edge::to_heaplet)
        .collect();
    hs.sort_by_cached_key(Heaplet::sort_key);
    hs
}

/// `||` of the components, each a sorted `*` chain. Isolated vertices vanish.
pub fn graph_to_term(g: &HeapGraph) -> HeapTerm {
    let mut comps: Vec<Vec<Heaplet>> = g
        .connected_components()
        .iter()
        .map(|c| component_heaplets(g, c))
        .filter(|hs| !hs.is_empty())
        .collect();
    comps.sort_by_cached_key(|hs| hs[0].sort_key());
    HeapTerm::disj_all(
        comps
            .into_iter()
            .map(|hs| HeapTerm::conj_all(hs.into_iter().map(HeapTerm::from))),
    )
}
