use std::collections::BTreeMap;

use serde::Serialize;

use super::{Edge, GraphError, HeapGraph, VertexId, VertexKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum LinkRole {
    Source,
    Target,
}

/// Undirected incidence between a midpoint and a former endpoint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Link {
    pub midpoint: usize,
    pub vertex: VertexId,
    pub role: LinkRole,
}

/// Vertex-centric encoding: every edge becomes a midpoint vertex carrying
/// the slot label, linked to its two endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct MidpointGraph {
    pub vertices: BTreeMap<VertexId, VertexKind>,
    pub midpoints: Vec<Option<String>>,
    pub links: Vec<Link>,
}

impl MidpointGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len() + self.midpoints.len()
    }
}

pub fn to_vertex_centric(g: &HeapGraph) -> MidpointGraph {
    let mut m = MidpointGraph {
        vertices: g.vertices().clone(),
        ..Default::default()
    };
    for (i, e) in g.edges().iter().enumerate() {
        m.midpoints.push(e.slot.clone());
        m.links.push(Link {
            midpoint: i,
            vertex: e.src.clone(),
            role: LinkRole::Source,
        });
        m.links.push(Link {
            midpoint: i,
            vertex: e.dst.clone(),
            role: LinkRole::Target,
        });
    }
    m
}

pub fn from_vertex_centric(m: &MidpointGraph) -> Result<HeapGraph, GraphError> {
    let mut ends: Vec<(Vec<&VertexId>, Vec<&VertexId>)> = vec![(vec![], vec![]); m.midpoints.len()];
    for link in &m.links {
        if !m.vertices.contains_key(&link.vertex) {
            return Err(GraphError::MalformedMidpointGraph(format!(
                "link to unknown vertex `{}`",
                link.vertex
            )));
        }
        let slot = ends.get_mut(link.midpoint).ok_or_else(|| {
            GraphError::MalformedMidpointGraph(format!("unknown midpoint {}", link.midpoint))
        })?;
        match link.role {
            LinkRole::Source => slot.0.push(&link.vertex),
            LinkRole::Target => slot.1.push(&link.vertex),
        }
    }
    let mut edges = std::collections::BTreeSet::new();
    for (i, (srcs, dsts)) in ends.iter().enumerate() {
        let ([src], [dst]) = (srcs.as_slice(), dsts.as_slice()) else {
            return Err(GraphError::MalformedMidpointGraph(format!(
                "midpoint {i} has {} source and {} target links",
                srcs.len(),
                dsts.len()
            )));
        };
        edges.insert(Edge {
            src: (*src).clone(),
            slot: m.midpoints[i].clone(),
            dst: (*dst).clone(),
        });
    }
    Ok(HeapGraph::from_raw(m.vertices.clone(), edges))
}
