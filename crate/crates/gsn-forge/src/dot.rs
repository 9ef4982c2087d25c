//! Graphviz export.
//!
//! One node per element with the conventional GSN shapes, one edge per
//! flattened relationship pair. `InContextOf` edges draw with a hollow
//! arrowhead. Output is deterministic: nodes sort by natural id order,
//! `SupportedBy` pairs precede `InContextOf` pairs, each in record order.

use crate::graph::{natural_cmp, Decorator, ElementKind, GsnGraph, RelationKind};

fn shape_attrs(kind: ElementKind) -> &'static str {
    match kind {
        ElementKind::Goal => "shape=box",
        ElementKind::Strategy => "shape=parallelogram",
        ElementKind::Solution => "shape=circle",
        ElementKind::Context => "shape=box, style=rounded",
        ElementKind::Assumption | ElementKind::Justification => "shape=ellipse",
    }
}

/// Single-letter flag drawn after the label, per GSN convention.
fn kind_flag(kind: ElementKind) -> Option<&'static str> {
    match kind {
        ElementKind::Assumption => Some("A"),
        ElementKind::Justification => Some("J"),
        _ => None,
    }
}

fn escape(text: &str) -> String {
    text.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Renders the graph in Graphviz dot syntax.
pub fn render_dot(graph: &GsnGraph) -> String {
    let mut out = String::from("digraph gsn {\n");
    out.push_str("  rankdir=TB;\n");
    out.push_str("  node [fontname=\"Helvetica\"];\n");

    let mut elements: Vec<_> = graph.elements.iter().collect();
    elements.sort_by(|a, b| natural_cmp(&a.id, &b.id));
    for el in elements {
        let mut label = format!("{}\\n{}", el.id, escape(&el.description));
        for d in Decorator::ALL {
            if el.has_decorator(d) {
                label.push_str(&format!("\\n({})", d.keyword()));
            }
        }
        if let Some(flag) = kind_flag(el.kind) {
            label.push_str(&format!(" {flag}"));
        }
        out.push_str(&format!(
            "  \"{}\" [{}, label=\"{}\"];\n",
            escape(&el.id),
            shape_attrs(el.kind),
            label
        ));
    }

    for wanted in [RelationKind::SupportedBy, RelationKind::InContextOf] {
        for pair in graph.pairs().filter(|p| p.kind == wanted) {
            let attrs = match wanted {
                RelationKind::SupportedBy => "",
                RelationKind::InContextOf => " [arrowhead=empty]",
            };
            out.push_str(&format!(
                "  \"{}\" -> \"{}\"{};\n",
                escape(pair.source),
                escape(pair.target),
                attrs
            ));
        }
    }
    out.push_str("}\n");
    out
}
