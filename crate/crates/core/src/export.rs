//! Graphviz rendering of a backbone.

use std::fmt::Write as _;

use crate::backbone::HierarchicalBackbone;
use crate::evaluate::ReferenceIndex;

/// Colour used for an edge whose endpoints are joined by a reference path.
pub const DOCUMENTED_COLOR: &str = "black";
/// Colour used for an edge with no reference path behind it.
pub const AUGMENTED_COLOR: &str = "red";

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One node per edge endpoint carrying its frequency as `count`, and one
/// edge per backbone edge carrying `alpha`. With a reference, each edge is
/// classed `documented` when the reference has a directed path between its
/// endpoints and `augmented` otherwise.
pub fn to_dot(backbone: &HierarchicalBackbone, reference: Option<&ReferenceIndex<'_>>) -> String {
    let mut out = String::from("digraph backbone {\n");
    let mut nodes: Vec<(u32, u32)> = backbone
        .edges()
        .iter()
        .flat_map(|e| [(e.source, e.n_source), (e.target, e.n_target)])
        .collect();
    nodes.sort_unstable();
    nodes.dedup_by_key(|n| n.0);
    for (t, count) in nodes {
        writeln!(out, "  {} [count={count}];", quote(backbone.tag(t))).unwrap();
    }
    for e in backbone.edges() {
        let (s, t) = (backbone.tag(e.source), backbone.tag(e.target));
        write!(out, "  {} -> {} [alpha={}", quote(s), quote(t), e.alpha).unwrap();
        if let Some(index) = reference {
            let h = index.reference();
            let documented = matches!(
                (h.index_of(s), h.index_of(t)),
                (Some(a), Some(b)) if index.reaches(a, b)
            );
            let (class, color) = if documented {
                ("documented", DOCUMENTED_COLOR)
            } else {
                ("augmented", AUGMENTED_COLOR)
            };
            write!(out, ", class={class}, color={color}").unwrap();
        }
        out.push_str("];\n");
    }
    out.push_str("}\n");
    out
}
