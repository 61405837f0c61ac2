//! Reader for the subset of OBO 1.2 needed to build a term hierarchy.
//!
//! Only `[Term]` stanzas are read and only these tags matter: `id`, `name`,
//! `namespace`, `is_a`, `relationship` and `is_obsolete`. The header's
//! `default-namespace` fills in terms without a `namespace` line.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::hierarchy::{ReferenceHierarchy, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Namespace {
    #[serde(rename = "biological_process", alias = "BP")]
    BiologicalProcess,
    #[serde(rename = "cellular_component", alias = "CC")]
    CellularComponent,
    #[serde(rename = "molecular_function", alias = "MF")]
    MolecularFunction,
}

impl Namespace {
    pub fn as_str(self) -> &'static str {
        match self {
            Namespace::BiologicalProcess => "biological_process",
            Namespace::CellularComponent => "cellular_component",
            Namespace::MolecularFunction => "molecular_function",
        }
    }

    pub fn abbreviation(self) -> &'static str {
        match self {
            Namespace::BiologicalProcess => "BP",
            Namespace::CellularComponent => "CC",
            Namespace::MolecularFunction => "MF",
        }
    }
}

impl fmt::Display for Namespace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Accepts the OBO names as well as `BP`/`CC`/`MF`.
impl FromStr for Namespace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "biological_process" | "BP" | "bp" => Ok(Namespace::BiologicalProcess),
            "cellular_component" | "CC" | "cc" => Ok(Namespace::CellularComponent),
            "molecular_function" | "MF" | "mf" => Ok(Namespace::MolecularFunction),
            other => Err(Error::Config(format!("unknown namespace `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyTerm {
    pub id: String,
    pub name: String,
    pub namespace: Option<Namespace>,
    pub obsolete: bool,
}

#[derive(Debug, Clone)]
pub struct OboOptions {
    pub relations: BTreeSet<Relation>,
    pub namespace: Option<Namespace>,
}

impl Default for OboOptions {
    fn default() -> Self {
        OboOptions {
            relations: [Relation::IsA, Relation::PartOf].into_iter().collect(),
            namespace: None,
        }
    }
}

impl OboOptions {
    pub fn with_namespace(namespace: Namespace) -> Self {
        OboOptions {
            namespace: Some(namespace),
            ..Self::default()
        }
    }
}

#[derive(Debug, Default)]
struct RawTerm {
    line: usize,
    id: Option<String>,
    name: String,
    namespace: Option<String>,
    obsolete: bool,
    parents: Vec<(String, Relation)>,
}

pub fn parse_obo(
    path: impl AsRef<Path>,
    options: &OboOptions,
) -> Result<(Vec<OntologyTerm>, ReferenceHierarchy)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_obo_str(&text, options)
}

/// Parses OBO text.
///
/// The returned terms are those passing the namespace filter, obsolete ones
/// included and flagged. Hierarchy nodes are the non-obsolete filtered terms
/// and edges run parent -> child for the selected relations. Links to an
/// obsolete or filtered-out parent are dropped; links to an id that appears
/// nowhere in the file are an integrity error.
pub fn parse_obo_str(
    text: &str,
    options: &OboOptions,
) -> Result<(Vec<OntologyTerm>, ReferenceHierarchy)> {
    let mut default_namespace: Option<String> = None;
    let mut raw: Vec<RawTerm> = Vec::new();
    let mut in_header = true;
    let mut current: Option<RawTerm> = None;

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('!') {
            continue;
        }
        if line.starts_with('[') {
            in_header = false;
            raw.extend(current.take());
            if line == "[Term]" {
                current = Some(RawTerm {
                    line: lineno,
                    ..RawTerm::default()
                });
            }
            continue;
        }
        let Some((tag, value)) = line.split_once(':') else {
            return Err(Error::parse(
                lineno,
                format!("expected `tag: value`, got `{line}`"),
            ));
        };
        let value = value.trim();
        if in_header {
            if tag == "default-namespace" {
                default_namespace = Some(value.to_owned());
            }
            continue;
        }
        let Some(term) = current.as_mut() else {
            continue;
        };
        match tag {
            "id" => term.id = Some(first_token(value).to_owned()),
            "name" => term.name = value.to_owned(),
            "namespace" => term.namespace = Some(value.to_owned()),
            "is_obsolete" => term.obsolete = value == "true",
            "is_a" => {
                let parent = first_token(value);
                if parent.is_empty() {
                    return Err(Error::parse(lineno, "empty is_a target"));
                }
                term.parents.push((parent.to_owned(), Relation::IsA));
            }
            "relationship" => {
                let mut tokens = strip_comment(value).split_whitespace();
                let (Some(kind), Some(target)) = (tokens.next(), tokens.next()) else {
                    return Err(Error::parse(
                        lineno,
                        format!("malformed relationship `{value}`"),
                    ));
                };
                if let Ok(relation) = kind.parse::<Relation>() {
                    term.parents.push((target.to_owned(), relation));
                }
            }
            _ => {}
        }
    }
    raw.extend(current.take());

    let mut terms = Vec::with_capacity(raw.len());
    let mut parents = Vec::with_capacity(raw.len());
    let mut by_id: HashMap<String, usize> = HashMap::with_capacity(raw.len());
    for t in raw {
        let Some(id) = t.id else {
            return Err(Error::parse(t.line, "[Term] stanza without an id"));
        };
        let namespace = match t.namespace.as_deref().or(default_namespace.as_deref()) {
            Some(ns) => Some(ns.parse::<Namespace>().map_err(|_| {
                Error::Integrity(format!("term {id} has unknown namespace `{ns}`"))
            })?),
            None if t.obsolete => None,
            None => return Err(Error::Integrity(format!("term {id} has no namespace"))),
        };
        if by_id.insert(id.clone(), terms.len()).is_some() {
            return Err(Error::Integrity(format!("duplicate term id {id}")));
        }
        terms.push(OntologyTerm {
            id,
            name: t.name,
            namespace,
            obsolete: t.obsolete,
        });
        parents.push(t.parents);
    }

    let selected = |t: &OntologyTerm| options.namespace.is_none_or(|ns| t.namespace == Some(ns));
    let keep: Vec<bool> = terms.iter().map(|t| !t.obsolete && selected(t)).collect();

    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for (i, term) in terms.iter().enumerate() {
        if !keep[i] {
            continue;
        }
        nodes.push(term.id.clone());
        for (parent, relation) in &parents[i] {
            if !options.relations.contains(relation) {
                continue;
            }
            let Some(&p) = by_id.get(parent) else {
                return Err(Error::Integrity(format!(
                    "term {} references unknown parent {parent}",
                    term.id
                )));
            };
            if keep[p] {
                edges.push((parent.clone(), term.id.clone(), *relation));
            }
        }
    }
    let hierarchy = ReferenceHierarchy::new(nodes, edges)?;

    let terms = terms.into_iter().filter(|t| selected(t)).collect();
    Ok((terms, hierarchy))
}

fn strip_comment(value: &str) -> &str {
    match value.find(" !") {
        Some(i) => &value[..i],
        None => value,
    }
}

fn first_token(value: &str) -> &str {
    strip_comment(value).split_whitespace().next().unwrap_or("")
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_TERMS: &str = "\
format-version: 1.2

[Term]
id: GO:0003674
name: molecular_function
namespace: molecular_function

[Term]
id: GO:0005488
name: binding
namespace: molecular_function
is_a: GO:0003674 ! molecular_function
";

    #[test]
    fn parent_child_snippet() {
        let (terms, h) = parse_obo_str(TWO_TERMS, &OboOptions::default()).unwrap();
        assert_eq!(terms.len(), 2);
        assert_eq!(h.node_count(), 2);
        assert_eq!(
            h.edge_names().collect::<Vec<_>>(),
            vec![("GO:0003674", "GO:0005488")]
        );
    }

    #[test]
    fn obsolete_terms_and_their_edges_are_dropped() {
        let text = format!(
            "{TWO_TERMS}
[Term]
id: GO:0000001
name: old
namespace: molecular_function
is_a: GO:0003674
is_obsolete: true
"
        );
        let (terms, h) = parse_obo_str(&text, &OboOptions::default()).unwrap();
        assert_eq!(terms.len(), 3);
        assert!(terms[2].obsolete);
        assert_eq!(h.node_count(), 2);
        assert_eq!(h.edge_count(), 1);
        assert!(h.index_of("GO:0000001").is_none());
    }

    #[test]
    fn unknown_parent_is_an_integrity_error() {
        let text = "[Term]\nid: GO:1\nnamespace: molecular_function\nis_a: GO:404\n";
        let err = parse_obo_str(text, &OboOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Integrity(_)), "{err}");
    }

    #[test]
    fn cycle_is_reported() {
        let text = "\
[Term]
id: X:1
namespace: molecular_function
is_a: X:2

[Term]
id: X:2
namespace: molecular_function
relationship: part_of X:1 ! back edge
";
        let err = parse_obo_str(text, &OboOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Cycle(ref c) if c.len() == 2), "{err}");
    }

    #[test]
    fn regulates_is_opt_in() {
        let text = "\
[Term]
id: X:1
namespace: biological_process

[Term]
id: X:2
namespace: biological_process
relationship: negatively_regulates X:1
";
        let (_, h) = parse_obo_str(text, &OboOptions::default()).unwrap();
        assert_eq!(h.edge_count(), 0);
        let mut opts = OboOptions::default();
        opts.relations.insert(Relation::Regulates);
        let (_, h) = parse_obo_str(text, &opts).unwrap();
        assert_eq!(h.edge_count(), 1);
    }

    #[test]
    fn default_namespace_and_typedef_stanzas() {
        let text = "\
default-namespace: cellular_component

[Term]
id: X:1

[Typedef]
id: part_of
name: part of
";
        let (terms, _) = parse_obo_str(text, &OboOptions::default()).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].namespace, Some(Namespace::CellularComponent));
    }

    #[test]
    fn missing_namespace_rejected() {
        let err = parse_obo_str("[Term]\nid: X:1\n", &OboOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Integrity(_)));
    }

    #[test]
    fn namespace_abbreviations() {
        assert_eq!(
            "MF".parse::<Namespace>().unwrap(),
            Namespace::MolecularFunction
        );
        assert_eq!(
            "cellular_component".parse::<Namespace>().unwrap(),
            Namespace::CellularComponent
        );
        assert!("XX".parse::<Namespace>().is_err());
    }
}
