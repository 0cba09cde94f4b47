use std::fmt::Write;

use super::{HeapGraph, VertexId, VertexKind};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn record_label(name: &str, slots: &[String]) -> String {
    let esc = |s: &str| {
        s.chars()
            .flat_map(|c| match c {
                '{' | '}' | '|' | '<' | '>' | '"' | '\\' => vec!['\\', c],
                c => vec![c],
            })
            .collect::<String>()
    };
    let mut label = format!("{{{}", esc(name));
    for s in slots {
        let _ = write!(label, "|<{}> {}", esc(s), esc(s));
    }
    label.push('}');
    label
}

/// Graphviz rendering. Roots are plain text, cells boxes, objects records
/// with one port per slot.
pub fn to_dot(g: &HeapGraph) -> String {
    let mut out = String::from("digraph heap {\n");
    let id = |v: &VertexId| quote(&v.to_string());
    for (v, kind) in g.vertices() {
        let attrs = match kind {
            VertexKind::StackRoot(name) => format!("shape=plaintext, label={}", quote(name)),
            VertexKind::Cell(label) => format!("shape=box, label={}", quote(label)),
            VertexKind::Object { class, slots } => {
                let name = match class {
                    Some(c) => format!("{v} : {c}"),
                    None => v.to_string(),
                };
                format!("shape=record, label={}", quote(&record_label(&name, slots)))
            }
        };
        let _ = writeln!(out, "  {} [{}];", id(v), attrs);
    }
    for e in g.edges() {
        match &e.slot {
            Some(s) => {
                let _ = writeln!(
                    out,
                    "  {}:{} -> {} [label={}];",
                    id(&e.src),
                    quote(s),
                    id(&e.dst),
                    quote(s)
                );
            }
            None => {
                let _ = writeln!(out, "  {} -> {};", id(&e.src), id(&e.dst));
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    #[test]
    fn one_edge_renders_two_nodes() {
        let g = HeapGraph::from_edges([Edge::simple("a", "b")]);
        let dot = to_dot(&g);
        assert_eq!(dot.matches("shape=").count(), 2);
        assert_eq!(dot.matches("->").count(), 1);
        assert!(dot.contains("\"a\" [shape=plaintext"));
        assert!(dot.contains("\"b\" [shape=box"));
    }

    #[test]
    fn objects_are_records_with_ports() {
        let g =
            HeapGraph::from_edges([Edge::new(VertexId::named("o"), Some("next"), VertexId::Nil)]);
        let dot = to_dot(&g);
        assert!(dot.contains("shape=record, label=\"{o|<next> next}\""));
        assert!(dot.contains("\"o\":\"next\" -> \"nil\" [label=\"next\"]"));
    }
}
