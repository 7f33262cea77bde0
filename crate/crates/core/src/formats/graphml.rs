use std::fmt::Write as _;

use quick_xml::escape::escape;

use crate::model::WorkspaceInstance;

const KEYS: &[(&str, &str)] = &[
    ("kind", "node"),
    ("actor", "node"),
    ("role", "node"),
    ("state", "node"),
    ("text", "node"),
    ("label", "edge"),
    ("attributes", "edge"),
];

fn data(out: &mut String, key: &str, value: &str) {
    let _ = writeln!(out, "      <data key=\"{key}\">{}</data>", escape(value));
}

/// GraphML rendering with the same content as the DOT export. Question
/// nodes have `kind` = `question`; anchor links are edges labelled
/// `anchors`.
pub fn export_graphml(w: &WorkspaceInstance) -> String {
    let mut w = w.clone();
    w.canonicalize();
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    for (id, scope) in KEYS {
        let _ = writeln!(out, "  <key id=\"{id}\" for=\"{scope}\" attr.name=\"{id}\" attr.type=\"string\"/>");
    }
    let _ = writeln!(out, "  <graph id=\"{}\" edgedefault=\"directed\">", escape(w.situation.as_str()));
    for n in &w.nodes {
        let _ = writeln!(out, "    <node id=\"{}\">", escape(n.local_key()));
        data(&mut out, "kind", "actor");
        data(&mut out, "actor", n.actor.mention());
        data(&mut out, "role", &n.role);
        data(&mut out, "state", &n.state);
        out.push_str("    </node>\n");
    }
    for (i, q) in w.questions.iter().enumerate() {
        let _ = writeln!(out, "    <node id=\"q{}\">", i + 1);
        data(&mut out, "kind", "question");
        data(&mut out, "text", &q.text);
        out.push_str("    </node>\n");
    }
    for e in &w.edges {
        let (Some(s), Some(t)) = (w.node(&e.source), w.node(&e.target)) else { continue };
        let _ = writeln!(out, "    <edge source=\"{}\" target=\"{}\">", escape(s.local_key()), escape(t.local_key()));
        data(&mut out, "label", &e.label);
        if let Some(a) = &e.attributes {
            data(&mut out, "attributes", a);
        }
        out.push_str("    </edge>\n");
    }
    for (i, q) in w.questions.iter().enumerate() {
        for a in &q.anchors {
            if let Some(n) = w.nodes_of(a).next() {
                let _ = writeln!(out, "    <edge source=\"q{}\" target=\"{}\">", i + 1, escape(n.local_key()));
                data(&mut out, "label", "anchors");
                out.push_str("    </edge>\n");
            }
        }
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}
