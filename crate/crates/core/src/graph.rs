//! Object–tag bipartite graphs and their one-mode projection onto tags.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Simple bipartite graph between objects and tags.
///
/// Identifiers are opaque strings interned to dense indices in order of first
/// appearance; [`BipartiteGraph::objects`] and [`BipartiteGraph::tags`] give
/// the index-to-name mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    objects: Vec<String>,
    tags: Arc<[String]>,
    /// Sorted, deduplicated tag indices per object.
    object_tags: Vec<Vec<u32>>,
    n_edges: usize,
}

impl BipartiteGraph {
    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn tag_count(&self) -> usize {
        self.tags.len()
    }

    pub fn edge_count(&self) -> usize {
        self.n_edges
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn tags(&self) -> &Arc<[String]> {
        &self.tags
    }

    pub fn tags_of(&self, object: usize) -> &[u32] {
        &self.object_tags[object]
    }

    /// Edges as `(object, tag)` names, grouped by object in index order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.object_tags
            .iter()
            .enumerate()
            .flat_map(move |(o, tags)| {
                tags.iter()
                    .map(move |&t| (self.objects[o].as_str(), self.tags[t as usize].as_str()))
            })
    }

    /// Number of objects attached to each tag.
    pub fn tag_degrees(&self) -> Vec<u32> {
        let mut degree = vec![0u32; self.tags.len()];
        for tags in &self.object_tags {
            for &t in tags {
                degree[t as usize] += 1;
            }
        }
        degree
    }
}

/// Incremental constructor used by the parsers and the benchmark generator.
#[derive(Debug, Default)]
pub struct BipartiteBuilder {
    object_index: HashMap<String, u32>,
    tag_index: HashMap<String, u32>,
    objects: Vec<String>,
    tags: Vec<String>,
    object_tags: Vec<Vec<u32>>,
}

impl BipartiteBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one edge. `record` is only used to label errors.
    pub fn add_edge(&mut self, record: usize, object: &str, tag: &str) -> Result<()> {
        if object.trim().is_empty() {
            return Err(Error::parse(record, "empty object identifier"));
        }
        if tag.trim().is_empty() {
            return Err(Error::parse(record, "empty tag identifier"));
        }
        let o = intern(&mut self.object_index, &mut self.objects, object);
        let t = intern(&mut self.tag_index, &mut self.tags, tag);
        if o as usize == self.object_tags.len() {
            self.object_tags.push(Vec::new());
        }
        self.object_tags[o as usize].push(t);
        Ok(())
    }

    pub fn build(mut self) -> Result<BipartiteGraph> {
        if self.objects.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut n_edges = 0;
        for tags in &mut self.object_tags {
            tags.sort_unstable();
            tags.dedup();
            n_edges += tags.len();
        }
        Ok(BipartiteGraph {
            objects: self.objects,
            tags: self.tags.into(),
            object_tags: self.object_tags,
            n_edges,
        })
    }
}

fn intern(index: &mut HashMap<String, u32>, names: &mut Vec<String>, name: &str) -> u32 {
    if let Some(&i) = index.get(name) {
        return i;
    }
    let i = u32::try_from(names.len()).expect("more than u32::MAX identifiers");
    index.insert(name.to_owned(), i);
    names.push(name.to_owned());
    i
}

/// Builds a bipartite graph from `(object, tag)` pairs, collapsing duplicates.
pub fn build_bipartite<I, O, T>(pairs: I) -> Result<BipartiteGraph>
where
    I: IntoIterator<Item = (O, T)>,
    O: AsRef<str>,
    T: AsRef<str>,
{
    let mut builder = BipartiteBuilder::new();
    for (i, (o, t)) in pairs.into_iter().enumerate() {
        builder.add_edge(i + 1, o.as_ref(), t.as_ref())?;
    }
    builder.build()
}

/// Co-occurrence count of an unordered tag pair, `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TagPair {
    pub u: u32,
    pub v: u32,
    pub count: u32,
}

/// One-mode projection onto tags: tag frequencies `N(u)` and pair weights
/// `N(u,v)` for every pair sharing at least one object.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceGraph {
    tags: Arc<[String]>,
    n_objects: usize,
    frequency: Vec<u32>,
    /// Sorted by `(u, v)`.
    pairs: Vec<TagPair>,
}

impl CooccurrenceGraph {
    /// Assembles a projection from stored parts, checking the counting
    /// invariants. Pairs may be given in any orientation and order.
    pub fn from_parts(
        tags: Arc<[String]>,
        n_objects: usize,
        frequency: Vec<u32>,
        pairs: Vec<TagPair>,
    ) -> Result<Self> {
        if frequency.len() != tags.len() {
            return Err(Error::Integrity(format!(
                "{} frequencies for {} tags",
                frequency.len(),
                tags.len()
            )));
        }
        if let Some((t, &f)) = frequency
            .iter()
            .enumerate()
            .find(|(_, &f)| f as usize > n_objects)
        {
            return Err(Error::Integrity(format!(
                "tag {} has frequency {f} above the object count {n_objects}",
                tags[t]
            )));
        }
        let mut pairs: Vec<TagPair> = pairs
            .into_iter()
            .map(|p| {
                if p.u > p.v {
                    TagPair {
                        u: p.v,
                        v: p.u,
                        count: p.count,
                    }
                } else {
                    p
                }
            })
            .collect();
        pairs.sort_unstable();
        for w in pairs.windows(2) {
            if (w[0].u, w[0].v) == (w[1].u, w[1].v) {
                return Err(Error::Integrity(format!(
                    "duplicate pair {} / {}",
                    tags[w[0].u as usize], tags[w[0].v as usize]
                )));
            }
        }
        for p in &pairs {
            let (u, v) = (p.u as usize, p.v as usize);
            if u == v || v >= tags.len() {
                return Err(Error::Integrity(format!("invalid pair ({u}, {v})")));
            }
            if p.count == 0 || p.count > frequency[u].min(frequency[v]) {
                return Err(Error::Integrity(format!(
                    "pair {} / {} has count {} outside 1..=min(N(u), N(v))",
                    tags[u], tags[v], p.count
                )));
            }
        }
        Ok(CooccurrenceGraph {
            tags,
            n_objects,
            frequency,
            pairs,
        })
    }

    pub fn tags(&self) -> &Arc<[String]> {
        &self.tags
    }

    pub fn object_count(&self) -> usize {
        self.n_objects
    }

    pub fn frequency(&self, tag: usize) -> u32 {
        self.frequency[tag]
    }

    pub fn frequencies(&self) -> &[u32] {
        &self.frequency
    }

    pub fn pairs(&self) -> &[TagPair] {
        &self.pairs
    }

    /// `N(u,v)`; zero for pairs that never co-occur.
    pub fn weight(&self, u: usize, v: usize) -> u32 {
        let (a, b) = if u < v {
            (u as u32, v as u32)
        } else {
            (v as u32, u as u32)
        };
        self.pairs
            .binary_search_by(|p| (p.u, p.v).cmp(&(a, b)))
            .map(|i| self.pairs[i].count)
            .unwrap_or(0)
    }
}

const OBJECTS_PER_TASK: usize = 4096;

/// Projects `b` onto its tags.
///
/// Pairs are enumerated per object over that object's tag set, so the cost is
/// `O(sum of squared object degrees)`. Objects are split across rayon workers
/// and partial counts merged; the sorted output does not depend on the split.
pub fn project(b: &BipartiteGraph) -> CooccurrenceGraph {
    let counts: HashMap<u64, u32> = b
        .object_tags
        .par_chunks(OBJECTS_PER_TASK)
        .map(|chunk| {
            let mut local: HashMap<u64, u32> = HashMap::new();
            for tags in chunk {
                for (i, &u) in tags.iter().enumerate() {
                    for &v in &tags[i + 1..] {
                        *local.entry(pair_key(u, v)).or_insert(0) += 1;
                    }
                }
            }
            local
        })
        .reduce(HashMap::new, |a, b| {
            let (mut big, small) = if a.len() >= b.len() { (a, b) } else { (b, a) };
            for (k, c) in small {
                *big.entry(k).or_insert(0) += c;
            }
            big
        });

    let mut pairs: Vec<TagPair> = counts
        .into_iter()
        .map(|(k, count)| TagPair {
            u: (k >> 32) as u32,
            v: k as u32,
            count,
        })
        .collect();
    pairs.sort_unstable();

    CooccurrenceGraph {
        tags: Arc::clone(&b.tags),
        n_objects: b.object_count(),
        frequency: b.tag_degrees(),
        pairs,
    }
}

// tag lists are sorted, so u < v here
fn pair_key(u: u32, v: u32) -> u64 {
    ((u as u64) << 32) | v as u64
}
