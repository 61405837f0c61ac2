//! GAF 2.x annotation files and multi-species merging.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{BipartiteBuilder, BipartiteGraph};
use crate::ingest::obo::{Namespace, OntologyTerm};

const GAF_COLUMNS: usize = 17;

/// GAF column 9.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aspect {
    Process,
    Component,
    Function,
}

impl Aspect {
    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "P" => Some(Aspect::Process),
            "C" => Some(Aspect::Component),
            "F" => Some(Aspect::Function),
            _ => None,
        }
    }

    pub fn namespace(self) -> Namespace {
        match self {
            Aspect::Process => Namespace::BiologicalProcess,
            Aspect::Component => Namespace::CellularComponent,
            Aspect::Function => Namespace::MolecularFunction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub product: String,
    pub term: String,
    pub aspect: Aspect,
    pub evidence: String,
    pub species: String,
}

#[derive(Debug, Clone, Default)]
pub enum EvidenceFilter {
    #[default]
    All,
    Include(BTreeSet<String>),
    Exclude(BTreeSet<String>),
}

impl EvidenceFilter {
    fn accepts(&self, code: &str) -> bool {
        match self {
            EvidenceFilter::All => true,
            EvidenceFilter::Include(codes) => codes.contains(code),
            EvidenceFilter::Exclude(codes) => !codes.contains(code),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct GafOptions {
    /// Label used to keep product ids of different sources apart. Defaults to
    /// the file name.
    pub species: Option<String>,
    pub evidence: EvidenceFilter,
}

pub fn parse_gaf(path: impl AsRef<Path>, options: &GafOptions) -> Result<Vec<AnnotationRecord>> {
    let path = path.as_ref();
    let species = match &options.species {
        Some(s) => s.clone(),
        None => path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string()),
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_gaf(BufReader::new(file), &species, &options.evidence).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Reads GAF rows. `!` lines are comments; rows whose qualifier column
/// contains `NOT` are skipped.
pub fn read_gaf<R: BufRead>(
    reader: R,
    species: &str,
    evidence: &EvidenceFilter,
) -> Result<Vec<AnnotationRecord>> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io("<gaf>", e))?;
        let line = line.trim_end_matches('\r');
        if line.starts_with('!') || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != GAF_COLUMNS {
            return Err(Error::parse(
                lineno,
                format!(
                    "expected {GAF_COLUMNS} tab-separated columns, found {}",
                    cols.len()
                ),
            ));
        }
        if cols[3].split('|').any(|q| q == "NOT") {
            continue;
        }
        if !evidence.accepts(cols[6]) {
            continue;
        }
        let product = cols[1];
        if product.is_empty() {
            return Err(Error::parse(lineno, "empty gene product id"));
        }
        let term = cols[4];
        if !is_term_id(term) {
            return Err(Error::parse(lineno, format!("malformed term id `{term}`")));
        }
        let Some(aspect) = Aspect::from_code(cols[8]) else {
            return Err(Error::parse(
                lineno,
                format!("unknown aspect `{}`", cols[8]),
            ));
        };
        records.push(AnnotationRecord {
            product: product.to_owned(),
            term: term.to_owned(),
            aspect,
            evidence: cols[6].to_owned(),
            species: species.to_owned(),
        });
    }
    Ok(records)
}

/// `PREFIX:LOCAL` with both parts non-empty and no whitespace.
fn is_term_id(id: &str) -> bool {
    match id.split_once(':') {
        Some((prefix, local)) => {
            !prefix.is_empty() && !local.is_empty() && !id.contains(char::is_whitespace)
        }
        None => false,
    }
}

/// Drops records whose term is unknown to the ontology, obsolete, or in a
/// namespace that disagrees with the record's aspect. Returns the survivors
/// and the number dropped.
pub fn filter_to_ontology(
    records: Vec<AnnotationRecord>,
    terms: &[OntologyTerm],
) -> (Vec<AnnotationRecord>, usize) {
    let by_id: HashMap<&str, &OntologyTerm> = terms.iter().map(|t| (t.id.as_str(), t)).collect();
    let before = records.len();
    let kept: Vec<_> = records
        .into_iter()
        .filter(|r| match by_id.get(r.term.as_str()) {
            Some(t) => !t.obsolete && t.namespace.is_none_or(|ns| ns == r.aspect.namespace()),
            None => false,
        })
        .collect();
    let dropped = before - kept.len();
    (kept, dropped)
}

/// Merges per-species record lists into one product–term bipartite graph.
///
/// Objects are keyed `<species>|<product>`. Records are visited in order of
/// species label (stable within a label), so the result does not depend on
/// the order of `lists`.
pub fn merge_annotations(
    lists: &[Vec<AnnotationRecord>],
    namespace: Option<Namespace>,
) -> Result<BipartiteGraph> {
    let mut all: Vec<&AnnotationRecord> = lists.iter().flatten().collect();
    all.sort_by(|a, b| a.species.cmp(&b.species));
    let mut builder = BipartiteBuilder::new();
    for (i, r) in all
        .into_iter()
        .filter(|r| namespace.is_none_or(|ns| r.aspect.namespace() == ns))
        .enumerate()
    {
        builder.add_edge(i + 1, &format!("{}|{}", r.species, r.product), &r.term)?;
    }
    builder.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(product: &str, qualifier: &str, term: &str, aspect: &str) -> String {
        let mut cols = vec![""; GAF_COLUMNS];
        cols[0] = "DB";
        cols[1] = product;
        cols[2] = product;
        cols[3] = qualifier;
        cols[4] = term;
        cols[5] = "REF:1";
        cols[6] = "IDA";
        cols[8] = aspect;
        cols[11] = "protein";
        cols[12] = "taxon:1";
        cols[13] = "20170101";
        cols[14] = "DB";
        cols.join("\t")
    }

    fn read(text: &str) -> Result<Vec<AnnotationRecord>> {
        read_gaf(text.as_bytes(), "sp", &EvidenceFilter::All)
    }

    #[test]
    fn comment_lines_skipped() {
        let text = format!(
            "!gaf-version: 2.1\n{}\n{}\n",
            row("P1", "enables", "GO:0000001", "F"),
            row("P2", "", "GO:0000002", "P")
        );
        let recs = read(&text).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].aspect.namespace(), Namespace::MolecularFunction);
        assert_eq!(recs[1].aspect, Aspect::Process);
    }

    #[test]
    fn not_qualifier_excluded() {
        let text = format!(
            "{}\n{}\n",
            row("P1", "NOT|enables", "GO:0000001", "F"),
            row("P2", "NOT", "GO:0000001", "F"),
        );
        assert!(read(&text).unwrap().is_empty());
    }

    #[test]
    fn wrong_column_count_names_line() {
        let text = format!("!c\n{}\nDB\tP3\n", row("P1", "", "GO:1", "F"));
        let err = read(&text).unwrap_err();
        assert!(matches!(err, Error::Parse { record: 3, .. }), "{err}");
    }

    #[test]
    fn evidence_filter() {
        let text = format!("{}\n", row("P1", "", "GO:1", "F"));
        let exclude = EvidenceFilter::Exclude(["IDA".to_owned()].into_iter().collect());
        assert!(read_gaf(text.as_bytes(), "sp", &exclude)
            .unwrap()
            .is_empty());
        let include = EvidenceFilter::Include(["IDA".to_owned()].into_iter().collect());
        assert_eq!(read_gaf(text.as_bytes(), "sp", &include).unwrap().len(), 1);
    }

    fn rec(species: &str, product: &str, term: &str, aspect: Aspect) -> AnnotationRecord {
        AnnotationRecord {
            product: product.into(),
            term: term.into(),
            aspect,
            evidence: "IDA".into(),
            species: species.into(),
        }
    }

    #[test]
    fn species_prefix_prevents_collisions() {
        let a = vec![rec("yeast", "P1", "GO:X", Aspect::Function)];
        let b = vec![rec("fly", "P1", "GO:X", Aspect::Function)];
        let g = merge_annotations(&[a, b], None).unwrap();
        assert_eq!((g.object_count(), g.tag_count()), (2, 1));
        assert_eq!(g.objects(), &["fly|P1".to_owned(), "yeast|P1".to_owned()]);
    }

    #[test]
    fn merge_counts_products() {
        let list = vec![
            rec("sp", "A", "GO:1", Aspect::Function),
            rec("sp", "A", "GO:2", Aspect::Function),
            rec("sp", "B", "GO:1", Aspect::Function),
            rec("sp", "C", "GO:3", Aspect::Function),
            rec("sp", "C", "GO:1", Aspect::Function),
        ];
        let g = merge_annotations(&[list], Some(Namespace::MolecularFunction)).unwrap();
        assert_eq!((g.object_count(), g.tag_count(), g.edge_count()), (3, 3, 5));
    }

    #[test]
    fn namespace_filter_can_empty_the_merge() {
        let list = vec![rec("sp", "A", "GO:1", Aspect::Function)];
        let err = merge_annotations(&[list], Some(Namespace::CellularComponent)).unwrap_err();
        assert!(matches!(err, Error::EmptyInput));
        assert!(matches!(
            merge_annotations(&[], None),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn ontology_filter() {
        let terms = vec![
            OntologyTerm {
                id: "GO:1".into(),
                name: "a".into(),
                namespace: Some(Namespace::MolecularFunction),
                obsolete: false,
            },
            OntologyTerm {
                id: "GO:2".into(),
                name: "b".into(),
                namespace: Some(Namespace::MolecularFunction),
                obsolete: true,
            },
            OntologyTerm {
                id: "GO:3".into(),
                name: "c".into(),
                namespace: Some(Namespace::CellularComponent),
                obsolete: false,
            },
        ];
        let recs = vec![
            rec("sp", "A", "GO:1", Aspect::Function),
            rec("sp", "A", "GO:2", Aspect::Function),
            rec("sp", "A", "GO:3", Aspect::Function),
            rec("sp", "A", "GO:9", Aspect::Function),
        ];
        let (kept, dropped) = filter_to_ontology(recs, &terms);
        assert_eq!(kept.len(), 1);
        assert_eq!(dropped, 3);
    }
}
