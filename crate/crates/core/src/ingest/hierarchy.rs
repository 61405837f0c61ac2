use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::dag::Digraph;
use crate::error::{Error, Result};

/// Kind of a parent/child link in a reference hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    IsA,
    PartOf,
    /// `regulates` and its positive/negative variants.
    Regulates,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::IsA => "is_a",
            Relation::PartOf => "part_of",
            Relation::Regulates => "regulates",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "is_a" => Ok(Relation::IsA),
            "part_of" => Ok(Relation::PartOf),
            "regulates" | "positively_regulates" | "negatively_regulates" => {
                Ok(Relation::Regulates)
            }
            other => Err(Error::Config(format!("unknown relation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HierarchyEdge {
    pub parent: usize,
    pub child: usize,
    pub relation: Relation,
}

/// Ground-truth DAG over term identifiers, edges directed parent -> child.
#[derive(Debug, Clone)]
pub struct ReferenceHierarchy {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    /// Sorted by `(parent, child)`, one edge per pair.
    edges: Vec<HierarchyEdge>,
    graph: Digraph,
}

impl ReferenceHierarchy {
    /// Builds and validates a hierarchy. Endpoints must be declared nodes and
    /// the edge set must be acyclic. When the same `(parent, child)` pair is
    /// given more than once the first relation wins.
    pub fn new<S, I>(nodes: Vec<String>, edges: I) -> Result<Self>
    where
        S: AsRef<str>,
        I: IntoIterator<Item = (S, S, Relation)>,
    {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::Integrity(format!("duplicate node `{n}`")));
            }
        }
        let lookup = |name: &str| {
            index.get(name).copied().ok_or_else(|| {
                Error::Integrity(format!("edge endpoint `{name}` is not a known node"))
            })
        };
        let mut resolved = Vec::new();
        for (parent, child, relation) in edges {
            resolved.push(HierarchyEdge {
                parent: lookup(parent.as_ref())?,
                child: lookup(child.as_ref())?,
                relation,
            });
        }
        // stable sort keeps the first relation of a duplicated pair in front
        resolved.sort_by_key(|e| (e.parent, e.child));
        resolved.dedup_by_key(|e| (e.parent, e.child));

        let graph = Digraph::from_edges(nodes.len(), resolved.iter().map(|e| (e.parent, e.child)));
        if let Some(cycle) = graph.find_cycle() {
            return Err(Error::Cycle(
                cycle.into_iter().map(|i| nodes[i].clone()).collect(),
            ));
        }
        Ok(ReferenceHierarchy {
            nodes,
            index,
            edges: resolved,
            graph,
        })
    }

    /// Hierarchy whose nodes are the endpoints of `edges` in order of first
    /// appearance. Every edge is labelled `is_a`.
    pub fn from_edge_list<S: AsRef<str>>(edges: &[(S, S)]) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut seen = HashSet::new();
        for (p, c) in edges {
            for name in [p.as_ref(), c.as_ref()] {
                if !seen.contains(name) {
                    seen.insert(name.to_owned());
                    nodes.push(name.to_owned());
                }
            }
        }
        Self::new(
            nodes,
            edges
                .iter()
                .map(|(p, c)| (p.as_ref(), c.as_ref(), Relation::IsA)),
        )
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn edges(&self) -> &[HierarchyEdge] {
        &self.edges
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn has_edge(&self, parent: &str, child: &str) -> bool {
        match (self.index_of(parent), self.index_of(child)) {
            (Some(p), Some(c)) => self.graph.has_edge(p, c),
            _ => false,
        }
    }

    pub fn edge_names(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges
            .iter()
            .map(|e| (self.nodes[e.parent].as_str(), self.nodes[e.child].as_str()))
    }

    /// Neighbour lists with edge directions ignored.
    pub fn undirected_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[e.parent].push(e.child);
            adj[e.child].push(e.parent);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// `parent<TAB>child` lines; nodes without edges are written as a single
    /// field so they survive a round trip.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let mut touched = vec![false; self.nodes.len()];
        for e in &self.edges {
            touched[e.parent] = true;
            touched[e.child] = true;
            out.push_str(&self.nodes[e.parent]);
            out.push('\t');
            out.push_str(&self.nodes[e.child]);
            out.push('\n');
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if !touched[i] {
                out.push_str(n);
                out.push('\n');
            }
        }
        out
    }

    /// Parses the format written by [`ReferenceHierarchy::to_tsv`]. Blank
    /// lines and lines starting with `#` are skipped.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        let mut edges = Vec::new();
        let mut declare = |name: &str, nodes: &mut Vec<String>| {
            if !seen.contains(name) {
                seen.insert(name.to_owned());
                nodes.push(name.to_owned());
            }
        };
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                [node] if !node.is_empty() => declare(node, &mut nodes),
                [parent, child] if !parent.is_empty() && !child.is_empty() => {
                    declare(parent, &mut nodes);
                    declare(child, &mut nodes);
                    edges.push((parent.to_string(), child.to_string(), Relation::IsA));
                }
                _ => {
                    return Err(Error::parse(
                        i + 1,
                        format!("expected `parent<TAB>child`, got {} fields", fields.len()),
                    ))
                }
            }
        }
        if nodes.is_empty() {
            return Err(Error::EmptyInput);
        }
        Self::new(nodes, edges)
    }

    pub fn read_tsv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text)
    }
}
