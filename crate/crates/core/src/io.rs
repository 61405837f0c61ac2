//! Stage file formats and atomic output.
//!
//! Every stage file is UTF-8 TSV with LF endings (tabs are shown as two
//! spaces below). The first line is a header comment naming the file kind and
//! its parameters:
//!
//! ```text
//! # projection objects=3
//! tag  a  2
//! pair  a  b  1
//!
//! # pruned objects=3 z_th=5
//! tag  a  2
//! pair  a  b  1  5.2
//!
//! # backbone alpha_th=0.03 parsimonious=false
//! u  v  alpha  z  N_u  N_v  N_uv
//! a  b  0.24  5.2  100  20  15
//! ```
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! reproduces the in-memory values exactly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use crate::backbone::{BackboneEdge, HierarchicalBackbone, PrunedGraph, PrunedPair};
use crate::error::{Error, Result};
use crate::graph::{CooccurrenceGraph, TagPair};

pub const BACKBONE_COLUMNS: &str = "u\tv\talpha\tz\tN_u\tN_v\tN_uv";

/// Shortest round-trip decimal form, switching to exponent notation for
/// magnitudes below `1e-5` or from `1e16` up.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Kind of a stage file, read from its header line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    Projection,
    Pruned,
    Backbone,
}

impl StageKind {
    fn as_str(self) -> &'static str {
        match self {
            StageKind::Projection => "projection",
            StageKind::Pruned => "pruned",
            StageKind::Backbone => "backbone",
        }
    }
}

struct Header {
    kind: StageKind,
    params: HashMap<String, String>,
}

impl Header {
    fn parse(line: &str) -> Result<Self> {
        let mut words = line
            .strip_prefix('#')
            .ok_or_else(|| Error::parse(1, "missing `#` header line"))?
            .split_whitespace();
        let kind = match words.next() {
            Some("projection") => StageKind::Projection,
            Some("pruned") => StageKind::Pruned,
            Some("backbone") => StageKind::Backbone,
            other => {
                return Err(Error::parse(
                    1,
                    format!("unknown stage file kind `{}`", other.unwrap_or("")),
                ))
            }
        };
        let mut params = HashMap::new();
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| Error::parse(1, format!("expected key=value, got `{w}`")))?;
            params.insert(k.to_owned(), v.to_owned());
        }
        Ok(Header { kind, params })
    }

    fn expect(self, kind: StageKind) -> Result<Self> {
        if self.kind != kind {
            return Err(Error::Config(format!(
                "expected a {} file, got a {} file",
                kind.as_str(),
                self.kind.as_str()
            )));
        }
        Ok(self)
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self
            .params
            .get(key)
            .ok_or_else(|| Error::parse(1, format!("header lacks `{key}`")))?;
        raw.parse()
            .map_err(|_| Error::parse(1, format!("bad value `{raw}` for `{key}`")))
    }
}

/// Kind of the stage file at `path`, from its first line.
pub fn stage_kind(path: impl AsRef<Path>) -> Result<StageKind> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(Header::parse(text.lines().next().unwrap_or(""))?.kind)
}

fn field<T: std::str::FromStr>(line: usize, value: &str, what: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::parse(line, format!("bad {what} `{value}`")))
}

/// Data lines with their 1-based line numbers, header excluded.
fn body(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i + 1, l.split('\t').collect()))
}

fn write_tags(out: &mut String, tags: &[String], frequency: &[u32]) {
    for (t, f) in tags.iter().zip(frequency) {
        writeln!(out, "tag\t{t}\t{f}").unwrap();
    }
}

pub fn write_projection(g: &CooccurrenceGraph) -> String {
    let mut out = format!("# projection objects={}\n", g.object_count());
    write_tags(&mut out, g.tags(), g.frequencies());
    for p in g.pairs() {
        let tags = g.tags();
        writeln!(
            out,
            "pair\t{}\t{}\t{}",
            tags[p.u as usize], tags[p.v as usize], p.count
        )
        .unwrap();
    }
    out
}

/// Tag table and per-line pair records shared by projection and pruned files.
struct TagTable {
    names: Vec<String>,
    index: HashMap<String, u32>,
    frequency: Vec<u32>,
}

impl TagTable {
    fn new() -> Self {
        TagTable {
            names: Vec::new(),
            index: HashMap::new(),
            frequency: Vec::new(),
        }
    }

    fn add(&mut self, line: usize, cols: &[&str]) -> Result<()> {
        let [_, name, freq] = cols else {
            return Err(Error::parse(line, "tag line needs 3 fields"));
        };
        let id = self.names.len() as u32;
        if self.index.insert((*name).to_owned(), id).is_some() {
            return Err(Error::parse(line, format!("duplicate tag `{name}`")));
        }
        self.names.push((*name).to_owned());
        self.frequency.push(field(line, freq, "frequency")?);
        Ok(())
    }

    fn lookup(&self, line: usize, name: &str) -> Result<u32> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::parse(line, format!("pair names undeclared tag `{name}`")))
    }
}

pub fn parse_projection(text: &str) -> Result<CooccurrenceGraph> {
    let header = Header::parse(text.lines().next().unwrap_or(""))?.expect(StageKind::Projection)?;
    let n_objects: usize = header.get("objects")?;
    let mut tags = TagTable::new();
    let mut pairs = Vec::new();
    for (line, cols) in body(text) {
        match cols[0] {
            "tag" => tags.add(line, &cols)?,
            "pair" => {
                let [_, u, v, n] = cols[..] else {
                    return Err(Error::parse(line, "pair line needs 4 fields"));
                };
                pairs.push(TagPair {
                    u: tags.lookup(line, u)?,
                    v: tags.lookup(line, v)?,
                    count: field(line, n, "count")?,
                });
            }
            other => return Err(Error::parse(line, format!("unknown record `{other}`"))),
        }
    }
    CooccurrenceGraph::from_parts(tags.names.into(), n_objects, tags.frequency, pairs)
}

pub fn write_pruned(g: &PrunedGraph) -> String {
    let mut out = format!(
        "# pruned objects={} z_th={}\n",
        g.object_count(),
        format_float(g.z_threshold())
    );
    write_tags(&mut out, g.tags(), g.frequencies());
    let tags = g.tags();
    for p in g.pairs() {
        writeln!(
            out,
            "pair\t{}\t{}\t{}\t{}",
            tags[p.u as usize],
            tags[p.v as usize],
            p.count,
            format_float(p.z)
        )
        .unwrap();
    }
    out
}

pub fn parse_pruned(text: &str) -> Result<PrunedGraph> {
    let header = Header::parse(text.lines().next().unwrap_or(""))?.expect(StageKind::Pruned)?;
    let n_objects: usize = header.get("objects")?;
    let z_th: f64 = header.get("z_th")?;
    let mut tags = TagTable::new();
    let mut pairs = Vec::new();
    for (line, cols) in body(text) {
        match cols[0] {
            "tag" => tags.add(line, &cols)?,
            "pair" => {
                let [_, u, v, n, z] = cols[..] else {
                    return Err(Error::parse(line, "pair line needs 5 fields"));
                };
                pairs.push(PrunedPair {
                    u: tags.lookup(line, u)?,
                    v: tags.lookup(line, v)?,
                    count: field(line, n, "count")?,
                    z: field(line, z, "z")?,
                });
            }
            other => return Err(Error::parse(line, format!("unknown record `{other}`"))),
        }
    }
    PrunedGraph::from_parts(tags.names.into(), n_objects, tags.frequency, z_th, pairs)
}

pub fn write_backbone(h: &HierarchicalBackbone) -> String {
    write_edges(
        h.tags(),
        h.edges(),
        h.alpha_threshold(),
        h.is_parsimonious(),
    )
}

/// Audit file of the edges a reduction removed, in the backbone format.
pub fn write_removed(h: &HierarchicalBackbone) -> String {
    write_edges(h.tags(), h.removed(), h.alpha_threshold(), false)
}

fn write_edges(
    tags: &[String],
    edges: &[BackboneEdge],
    alpha_th: f64,
    parsimonious: bool,
) -> String {
    let mut out = format!(
        "# backbone alpha_th={} parsimonious={parsimonious}\n{BACKBONE_COLUMNS}\n",
        format_float(alpha_th)
    );
    for e in edges {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            tags[e.source as usize],
            tags[e.target as usize],
            format_float(e.alpha),
            format_float(e.z),
            e.n_source,
            e.n_target,
            e.n_pair
        )
        .unwrap();
    }
    out
}

/// Reads a backbone file. The tag table is the sorted set of edge
/// endpoints.
pub fn parse_backbone(text: &str) -> Result<HierarchicalBackbone> {
    let header = Header::parse(text.lines().next().unwrap_or(""))?.expect(StageKind::Backbone)?;
    let alpha_th: f64 = header.get("alpha_th")?;
    let parsimonious: bool = header.get("parsimonious")?;
    let mut rows = Vec::new();
    for (line, cols) in body(text) {
        if cols.join("\t") == BACKBONE_COLUMNS {
            continue;
        }
        let [u, v, alpha, z, nu, nv, nuv] = cols[..] else {
            return Err(Error::parse(line, "backbone line needs 7 fields"));
        };
        rows.push((
            u,
            v,
            field::<f64>(line, alpha, "alpha")?,
            field::<f64>(line, z, "z")?,
            field::<u32>(line, nu, "N_u")?,
            field::<u32>(line, nv, "N_v")?,
            field::<u32>(line, nuv, "N_uv")?,
        ));
    }
    let mut names: Vec<&str> = rows.iter().flat_map(|r| [r.0, r.1]).collect();
    names.sort_unstable();
    names.dedup();
    let id = |n: &str| names.binary_search(&n).expect("endpoint collected") as u32;
    let edges = rows
        .iter()
        .map(
            |&(u, v, alpha, z, n_source, n_target, n_pair)| BackboneEdge {
                source: id(u),
                target: id(v),
                alpha,
                z,
                n_source,
                n_target,
                n_pair,
            },
        )
        .collect();
    let tags: Arc<[String]> = names
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .into();
    HierarchicalBackbone::from_edges(tags, alpha_th, edges, parsimonious)
}

/// Reads and parses a stage file.
pub fn read_stage<T>(path: impl AsRef<Path>, parse: impl FnOnce(&str) -> Result<T>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text)
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, renamed into place once complete.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backbone::{build_backbone, prune, transitive_reduce};
    use crate::graph::{build_bipartite, project};

    fn sample() -> CooccurrenceGraph {
        let mut pairs = Vec::new();
        for i in 0..40 {
            pairs.push((format!("o{i}"), "root".to_owned()));
            if i % 2 == 0 {
                pairs.push((format!("o{i}"), "mid".to_owned()));
            }
            if i % 4 == 0 {
                pairs.push((format!("o{i}"), "leaf".to_owned()));
            }
            if i % 5 == 0 {
                pairs.push((format!("o{i}"), "other".to_owned()));
            }
        }
        project(&build_bipartite(pairs).unwrap())
    }

    #[test]
    fn projection_round_trip() {
        let g = sample();
        let text = write_projection(&g);
        assert!(text.starts_with("# projection objects=40\n"));
        assert_eq!(parse_projection(&text).unwrap(), g);
    }

    #[test]
    fn pruned_round_trip() {
        let p = prune(&sample(), 0.5).unwrap();
        assert!(!p.pairs().is_empty());
        assert_eq!(parse_pruned(&write_pruned(&p)).unwrap(), p);
    }

    #[test]
    fn backbone_round_trip_and_audit() {
        let p = prune(&sample(), 0.5).unwrap();
        let b = build_backbone(&p, 1e-6).unwrap();
        let text = write_backbone(&b);
        assert!(text.lines().nth(1) == Some(BACKBONE_COLUMNS));
        let back = parse_backbone(&text).unwrap();
        assert_eq!(
            back.edge_names().collect::<Vec<_>>(),
            b.edge_names().collect::<Vec<_>>()
        );
        assert_eq!(write_backbone(&back), text);

        let r = transitive_reduce(&b).unwrap();
        let reparsed = parse_backbone(&write_backbone(&r)).unwrap();
        assert!(reparsed.is_parsimonious());
        assert_eq!(
            parse_backbone(&write_removed(&r)).unwrap().edges().len(),
            r.removed().len()
        );
    }

    #[test]
    fn kind_mismatch_and_malformed_lines() {
        let text = write_projection(&sample());
        assert!(matches!(parse_pruned(&text), Err(Error::Config(_))));
        let bad = "# projection objects=2\ntag\ta\t1\npair\ta\tzz\t1\n";
        assert!(matches!(
            parse_projection(bad),
            Err(Error::Parse { record: 3, .. })
        ));
        assert!(matches!(
            parse_projection("tag\ta\t1\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn float_format_round_trips() {
        for x in [
            0.0,
            1.0,
            0.24,
            7.850462293418876e-17,
            -3.5e-9,
            1e20,
            12345.678,
            f64::MIN_POSITIVE,
        ] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(7.850462293418876e-17), "7.850462293418876e-17");
        assert_eq!(format_float(0.5), "0.5");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.tsv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
