use std::collections::BTreeSet;
use std::path::PathBuf;

use hbackbone::ingest::{
    filter_to_ontology, merge_annotations, parse_gaf, parse_obo, GafOptions, Namespace, OboOptions,
    Relation,
};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn set<'a>(items: impl IntoIterator<Item = (&'a str, &'a str)>) -> BTreeSet<(String, String)> {
    items
        .into_iter()
        .map(|(a, b)| (a.to_owned(), b.to_owned()))
        .collect()
}

const MF_EDGES: [(&str, &str); 8] = [
    ("GO:0003674", "GO:0005488"),
    ("GO:0003674", "GO:0003824"),
    ("GO:0005488", "GO:0005515"),
    ("GO:0003824", "GO:0016787"),
    ("GO:0016787", "GO:0004386"),
    ("GO:0003824", "GO:0004386"),
    ("GO:0005488", "GO:0000166"),
    ("GO:0005515", "GO:0000166"),
];

#[test]
fn obo_all_namespaces() {
    let (terms, h) = parse_obo(fixture("mini.obo"), &OboOptions::default()).unwrap();
    assert_eq!(terms.len(), 13);
    assert_eq!(terms.iter().filter(|t| t.obsolete).count(), 1);
    let nodes: BTreeSet<&str> = h.nodes().iter().map(String::as_str).collect();
    let expected: BTreeSet<&str> = [
        "GO:0003674",
        "GO:0005488",
        "GO:0003824",
        "GO:0005515",
        "GO:0016787",
        "GO:0004386",
        "GO:0000166",
        "GO:0008150",
        "GO:0009987",
        "GO:0065007",
        "GO:0005575",
        "GO:0005623",
    ]
    .into_iter()
    .collect();
    assert_eq!(nodes, expected);
    let mut edges = set(MF_EDGES);
    edges.extend(set([
        ("GO:0008150", "GO:0009987"),
        ("GO:0008150", "GO:0065007"),
        ("GO:0005575", "GO:0005623"),
    ]));
    assert_eq!(set(h.edge_names()), edges);
    let part_of = h
        .edges()
        .iter()
        .filter(|e| e.relation == Relation::PartOf)
        .count();
    assert_eq!(part_of, 1);
}

#[test]
fn obo_molecular_function_only() {
    let opts = OboOptions::with_namespace(Namespace::MolecularFunction);
    let (terms, h) = parse_obo(fixture("mini.obo"), &opts).unwrap();
    assert_eq!(terms.len(), 8);
    assert_eq!(h.node_count(), 7);
    assert_eq!(set(h.edge_names()), set(MF_EDGES));
    assert!(terms
        .iter()
        .any(|t| t.id == "GO:0005488" && t.name == "binding"));
}

#[test]
fn obo_with_regulates() {
    let mut opts = OboOptions::with_namespace(Namespace::BiologicalProcess);
    opts.relations.insert(Relation::Regulates);
    let (_, h) = parse_obo(fixture("mini.obo"), &opts).unwrap();
    assert!(h.has_edge("GO:0009987", "GO:0065007"));
    assert_eq!(h.edge_count(), 3);
}

fn records(name: &str) -> Vec<(String, String)> {
    parse_gaf(fixture(name), &GafOptions::default())
        .unwrap()
        .into_iter()
        .map(|r| (r.product, r.term))
        .collect()
}

#[test]
fn gaf_records() {
    assert_eq!(
        records("yeast.gaf"),
        vec![
            ("S1".into(), "GO:0005515".into()),
            ("S1".into(), "GO:0016787".into()),
            ("S2".into(), "GO:0004386".into()),
            ("S3".into(), "GO:0009987".into()),
            ("S3".into(), "GO:0000001".into()),
            ("S4".into(), "GO:0005623".into()),
            ("S4".into(), "GO:9999999".into()),
            ("S1".into(), "GO:0005515".into()),
        ]
    );
    assert_eq!(
        records("fly.gaf"),
        vec![
            ("F1".into(), "GO:0005515".into()),
            ("S1".into(), "GO:0000166".into())
        ]
    );
}

#[test]
fn merged_annotation_graph() {
    let (terms, _) = parse_obo(fixture("mini.obo"), &OboOptions::default()).unwrap();
    let opts = GafOptions::default();
    let (yeast, dropped) =
        filter_to_ontology(parse_gaf(fixture("yeast.gaf"), &opts).unwrap(), &terms);
    assert_eq!(dropped, 2);
    let (fly, dropped) = filter_to_ontology(parse_gaf(fixture("fly.gaf"), &opts).unwrap(), &terms);
    assert_eq!(dropped, 0);

    let lists = [yeast, fly];
    let mf = merge_annotations(&lists, Some(Namespace::MolecularFunction)).unwrap();
    let edges: BTreeSet<(String, String)> = mf
        .edges()
        .map(|(o, t)| (o.to_owned(), t.to_owned()))
        .collect();
    assert_eq!(
        edges,
        set([
            ("yeast.gaf|S1", "GO:0005515"),
            ("yeast.gaf|S1", "GO:0016787"),
            ("yeast.gaf|S2", "GO:0004386"),
            ("fly.gaf|F1", "GO:0005515"),
            ("fly.gaf|S1", "GO:0000166"),
        ])
    );
    assert_eq!((mf.object_count(), mf.tag_count()), (4, 4));

    let all = merge_annotations(&lists, None).unwrap();
    assert_eq!((all.object_count(), all.edge_count()), (6, 7));
}
