//! Input readers: delimited bipartite files, OBO hierarchies, GAF annotations.

pub mod gaf;
pub mod hierarchy;
pub mod obo;
pub mod tsv;

pub use gaf::{
    filter_to_ontology, merge_annotations, parse_gaf, read_gaf, AnnotationRecord, Aspect,
    EvidenceFilter, GafOptions,
};
pub use hierarchy::{HierarchyEdge, ReferenceHierarchy, Relation};
pub use obo::{parse_obo, parse_obo_str, Namespace, OboOptions, OntologyTerm};
pub use tsv::{parse_tsv_bipartite, read_tsv_bipartite, write_tsv_bipartite, Column, TsvOptions};
