use std::fmt::Write as _;

use crate::model::WorkspaceInstance;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz rendering. Nodes are labelled `actor\nrole: state`, questions
/// are `note` shapes tied to their anchor actors by dashed lines, and edge
/// labels carry attributes in brackets. Output follows canonical order.
pub fn export_dot(w: &WorkspaceInstance) -> String {
    if w.nodes.is_empty() && w.edges.is_empty() && w.questions.is_empty() {
        return "digraph gsw {}".to_string();
    }
    let mut w = w.clone();
    w.canonicalize();
    let mut out = String::from("digraph gsw {\n");
    out.push_str("  node [shape=box];\n");
    for n in &w.nodes {
        let label = format!("{}\n{}: {}", n.actor.mention(), n.role, n.state);
        let _ = writeln!(out, "  {} [label={}];", quote(n.local_key()), quote(&label));
    }
    for e in &w.edges {
        let (Some(s), Some(t)) = (w.node(&e.source), w.node(&e.target)) else { continue };
        let label = match &e.attributes {
            Some(a) => format!("{} [{a}]", e.label),
            None => e.label.clone(),
        };
        let _ = writeln!(out, "  {} -> {} [label={}];", quote(s.local_key()), quote(t.local_key()), quote(&label));
    }
    for (i, q) in w.questions.iter().enumerate() {
        let id = format!("q{}", i + 1);
        let _ = writeln!(out, "  {} [shape=note, label={}];", quote(&id), quote(&q.text));
        for a in &q.anchors {
            if let Some(n) = w.nodes_of(a).next() {
                let _ = writeln!(
                    out,
                    "  {} -> {} [style=dashed, arrowhead=none];",
                    quote(&id),
                    quote(n.local_key())
                );
            }
        }
    }
    out.push('}');
    out
}
