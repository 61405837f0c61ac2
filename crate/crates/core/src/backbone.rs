//! Significance pruning of the co-occurrence graph, hierarchy-strength
//! scoring and backbone assembly.
//!
//! The pipeline is
//!
//! 1. [`prune`]: keep tag pairs whose co-occurrence z-score under the
//!    hypergeometric null reaches `z_th`;
//! 2. [`ScoredPairs::new`]: orient every surviving pair from the more frequent
//!    tag to the less frequent one and attach its hierarchy strength `alpha`;
//! 3. [`ScoredPairs::backbone`] / [`build_backbone`]: keep edges with
//!    `alpha >= alpha_th`;
//! 4. optionally [`transitive_reduce`] to drop edges implied by longer paths.
//!
//! Every backbone edge points from a strictly more frequent tag to a strictly
//! less frequent one, so the result is acyclic by construction. The cycle
//! check that still runs on assembly guards that invariant.

use std::cmp::Ordering;
use std::sync::Arc;

use rayon::prelude::*;

use crate::dag::Digraph;
use crate::error::{Error, Result};
use crate::graph::CooccurrenceGraph;

/// Mean and variance of the co-occurrence count of two tags under the
/// degree-preserving bipartite null model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

impl Moments {
    pub fn sigma(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Hypergeometric moments of `N(u,v)` given `N(u)`, `N(v)` and the number of
/// objects.
pub fn cooccurrence_moments(n_u: u64, n_v: u64, n_objects: u64) -> Result<Moments> {
    if n_objects < 2 {
        return Err(Error::Domain(format!(
            "co-occurrence variance needs at least 2 objects, got {n_objects}"
        )));
    }
    if n_u > n_objects || n_v > n_objects {
        return Err(Error::Domain(format!(
            "tag frequencies ({n_u}, {n_v}) exceed the object count {n_objects}"
        )));
    }
    let (nu, nv, n) = (n_u as f64, n_v as f64, n_objects as f64);
    let mean = nu * nv / n;
    let variance = mean * ((n - nu) / n) * ((n - nv) / (n - 1.0));
    Ok(Moments { mean, variance })
}

/// `(observed - mean) / sigma`, or `None` when the null is degenerate.
pub fn z_score(observed: u32, moments: Moments) -> Option<f64> {
    let sigma = moments.sigma();
    (sigma > 0.0).then(|| (observed as f64 - moments.mean) / sigma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrunedPair {
    pub u: u32,
    pub v: u32,
    pub count: u32,
    pub z: f64,
}

/// Co-occurrence graph restricted to significant pairs, with degrees counted
/// on the survivors.
#[derive(Debug, Clone, PartialEq)]
pub struct PrunedGraph {
    tags: Arc<[String]>,
    n_objects: usize,
    frequency: Vec<u32>,
    z_th: f64,
    pairs: Vec<PrunedPair>,
    degree: Vec<u32>,
    k_max: u32,
}

impl PrunedGraph {
    /// Rebuilds a pruned graph from stored survivors, recomputing degrees.
    pub fn from_parts(
        tags: Arc<[String]>,
        n_objects: usize,
        frequency: Vec<u32>,
        z_th: f64,
        mut pairs: Vec<PrunedPair>,
    ) -> Result<Self> {
        if frequency.len() != tags.len() {
            return Err(Error::Integrity(format!(
                "{} frequencies for {} tags",
                frequency.len(),
                tags.len()
            )));
        }
        for p in &mut pairs {
            if p.u > p.v {
                std::mem::swap(&mut p.u, &mut p.v);
            }
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
            if p.z.is_nan() || p.z < z_th {
                return Err(Error::Integrity(format!(
                    "pair {} / {} has z = {} below the threshold {z_th}",
                    tags[u], tags[v], p.z
                )));
            }
        }
        pairs.sort_by_key(|p| (p.u, p.v));
        Ok(Self::with_degrees(tags, n_objects, frequency, z_th, pairs))
    }

    fn with_degrees(
        tags: Arc<[String]>,
        n_objects: usize,
        frequency: Vec<u32>,
        z_th: f64,
        pairs: Vec<PrunedPair>,
    ) -> Self {
        let mut degree = vec![0u32; tags.len()];
        for p in &pairs {
            degree[p.u as usize] += 1;
            degree[p.v as usize] += 1;
        }
        let k_max = degree.iter().copied().max().unwrap_or(0);
        PrunedGraph {
            tags,
            n_objects,
            frequency,
            z_th,
            pairs,
            degree,
            k_max,
        }
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

    pub fn z_threshold(&self) -> f64 {
        self.z_th
    }

    pub fn pairs(&self) -> &[PrunedPair] {
        &self.pairs
    }

    /// `k_u`: number of surviving pairs incident to `tag`.
    pub fn degree(&self, tag: usize) -> u32 {
        self.degree[tag]
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }
}

/// Keeps pairs with `sigma > 0` and `z >= z_th`.
pub fn prune(g: &CooccurrenceGraph, z_th: f64) -> Result<PrunedGraph> {
    if !z_th.is_finite() {
        return Err(Error::Config(format!(
            "z threshold must be finite, got {z_th}"
        )));
    }
    let n_objects = g.object_count() as u64;
    let freq = g.frequencies();
    let pairs: Vec<PrunedPair> = g
        .pairs()
        .par_iter()
        .filter_map(|p| {
            let moments = cooccurrence_moments(
                freq[p.u as usize] as u64,
                freq[p.v as usize] as u64,
                n_objects,
            )
            .ok()?;
            let z = z_score(p.count, moments)?;
            (z >= z_th).then_some(PrunedPair {
                u: p.u,
                v: p.v,
                count: p.count,
                z,
            })
        })
        .collect();
    Ok(PrunedGraph::with_degrees(
        Arc::clone(g.tags()),
        g.object_count(),
        freq.to_vec(),
        z_th,
        pairs,
    ))
}

/// Degree factor `f(k_u, k_v)` multiplying the conditional-probability
/// asymmetry.
pub trait DegreeWeight {
    fn weight(&self, k_u: u32, k_v: u32, k_max: u32) -> f64;
}

/// `min(k_u, k_v) / k_max`: favours pairs of well-connected tags.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinDegreeRatio;

impl DegreeWeight for MinDegreeRatio {
    fn weight(&self, k_u: u32, k_v: u32, k_max: u32) -> f64 {
        k_u.min(k_v) as f64 / k_max as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `u -> v`
    Forward,
    /// `v -> u`
    Backward,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strength {
    /// Signed `alpha_{u->v}`; positive means `u -> v`.
    pub alpha: f64,
    pub direction: Direction,
}

impl Strength {
    pub fn magnitude(&self) -> f64 {
        self.alpha.abs()
    }
}

/// Hierarchy strength `alpha_{u->v}` with the `min(k_u, k_v) / k_max` weight.
pub fn hierarchy_strength(
    n_u: u32,
    n_v: u32,
    n_uv: u32,
    k_u: u32,
    k_v: u32,
    k_max: u32,
) -> Result<Strength> {
    hierarchy_strength_with(&MinDegreeRatio, n_u, n_v, n_uv, k_u, k_v, k_max)
}

pub fn hierarchy_strength_with<W: DegreeWeight>(
    weight: &W,
    n_u: u32,
    n_v: u32,
    n_uv: u32,
    k_u: u32,
    k_v: u32,
    k_max: u32,
) -> Result<Strength> {
    if k_max == 0 {
        return Err(Error::Domain(
            "k_max is 0: the pruned graph has no edges".into(),
        ));
    }
    if n_u == 0 || n_v == 0 {
        return Err(Error::Domain(format!("zero tag frequency ({n_u}, {n_v})")));
    }
    if n_uv > n_u.min(n_v) {
        return Err(Error::Domain(format!(
            "co-occurrence {n_uv} exceeds min({n_u}, {n_v})"
        )));
    }
    if n_u == n_v {
        return Ok(Strength {
            alpha: 0.0,
            direction: Direction::None,
        });
    }
    let f = weight.weight(k_u, k_v, k_max);
    let alpha = f * (n_uv as f64 / n_v as f64 - n_uv as f64 / n_u as f64);
    let direction = match alpha.partial_cmp(&0.0) {
        Some(Ordering::Greater) => Direction::Forward,
        Some(Ordering::Less) => Direction::Backward,
        _ => Direction::None,
    };
    Ok(Strength { alpha, direction })
}

/// Directed backbone edge `source -> target` with the statistics behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackboneEdge {
    pub source: u32,
    pub target: u32,
    pub alpha: f64,
    pub z: f64,
    pub n_source: u32,
    pub n_target: u32,
    pub n_pair: u32,
}

/// Every directed pair of a pruned graph with positive strength, sorted by
/// decreasing `alpha` (ties by source, then target). A backbone at any
/// threshold is a prefix of this list.
#[derive(Debug, Clone)]
pub struct ScoredPairs {
    tags: Arc<[String]>,
    edges: Vec<BackboneEdge>,
}

impl ScoredPairs {
    pub fn new(p: &PrunedGraph) -> Self {
        Self::with_weight(p, &MinDegreeRatio)
    }

    pub fn with_weight<W: DegreeWeight + Sync>(p: &PrunedGraph, weight: &W) -> Self {
        let mut edges: Vec<BackboneEdge> = p
            .pairs()
            .par_iter()
            .filter_map(|pair| {
                let (u, v) = (pair.u as usize, pair.v as usize);
                let (nu, nv) = (p.frequency(u), p.frequency(v));
                // orient from the more frequent tag so alpha comes out positive
                let (s, t) = match nu.cmp(&nv) {
                    Ordering::Greater => (u, v),
                    Ordering::Less => (v, u),
                    Ordering::Equal => return None,
                };
                let strength = hierarchy_strength_with(
                    weight,
                    p.frequency(s),
                    p.frequency(t),
                    pair.count,
                    p.degree(s),
                    p.degree(t),
                    p.k_max(),
                )
                .expect("pruned pairs satisfy the strength preconditions");
                (strength.direction == Direction::Forward).then_some(BackboneEdge {
                    source: s as u32,
                    target: t as u32,
                    alpha: strength.alpha,
                    z: pair.z,
                    n_source: p.frequency(s),
                    n_target: p.frequency(t),
                    n_pair: pair.count,
                })
            })
            .collect();
        edges.sort_by(|a, b| {
            b.alpha
                .total_cmp(&a.alpha)
                .then(a.source.cmp(&b.source))
                .then(a.target.cmp(&b.target))
        });
        ScoredPairs {
            tags: Arc::clone(p.tags()),
            edges,
        }
    }

    pub fn tags(&self) -> &Arc<[String]> {
        &self.tags
    }

    pub fn edges(&self) -> &[BackboneEdge] {
        &self.edges
    }

    /// Number of edges with `alpha >= alpha_th`.
    pub fn count_at(&self, alpha_th: f64) -> usize {
        self.edges.partition_point(|e| e.alpha >= alpha_th)
    }

    /// Largest threshold that admits at least `target` edges: the alpha of
    /// the `target`-th strongest edge. Ties at that value may admit more.
    pub fn alpha_for_target_edges(&self, target: usize) -> Option<f64> {
        if target == 0 {
            return None;
        }
        self.edges.get(target - 1).map(|e| e.alpha)
    }

    pub fn backbone(&self, alpha_th: f64) -> Result<HierarchicalBackbone> {
        if !(alpha_th.is_finite() && alpha_th > 0.0) {
            return Err(Error::Config(format!(
                "alpha threshold must be positive and finite, got {alpha_th}"
            )));
        }
        let edges = self.edges[..self.count_at(alpha_th)].to_vec();
        let backbone = HierarchicalBackbone {
            tags: Arc::clone(&self.tags),
            alpha_th,
            edges,
            parsimonious: false,
            removed: Vec::new(),
        };
        backbone.check_acyclic()?;
        Ok(backbone)
    }
}

/// Directed acyclic backbone over tags.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalBackbone {
    tags: Arc<[String]>,
    alpha_th: f64,
    edges: Vec<BackboneEdge>,
    parsimonious: bool,
    removed: Vec<BackboneEdge>,
}

impl HierarchicalBackbone {
    /// Assembles a backbone from stored edges and re-validates it.
    pub fn from_edges(
        tags: Arc<[String]>,
        alpha_th: f64,
        edges: Vec<BackboneEdge>,
        parsimonious: bool,
    ) -> Result<Self> {
        if alpha_th.is_nan() || alpha_th <= 0.0 {
            return Err(Error::Config(format!(
                "alpha threshold must be positive, got {alpha_th}"
            )));
        }
        for e in &edges {
            let (s, t) = (e.source as usize, e.target as usize);
            if s >= tags.len() || t >= tags.len() {
                return Err(Error::Integrity(format!(
                    "edge ({s}, {t}) references an unknown tag"
                )));
            }
            if e.n_source <= e.n_target {
                return Err(Error::Integrity(format!(
                    "edge {} -> {} does not go from a more to a less frequent tag ({} <= {})",
                    tags[s], tags[t], e.n_source, e.n_target
                )));
            }
            if e.alpha.is_nan() || e.alpha < alpha_th {
                return Err(Error::Integrity(format!(
                    "edge {} -> {} has alpha {} below {alpha_th}",
                    tags[s], tags[t], e.alpha
                )));
            }
        }
        let backbone = HierarchicalBackbone {
            tags,
            alpha_th,
            edges,
            parsimonious: false,
            removed: Vec::new(),
        };
        backbone.check_acyclic()?;
        if parsimonious {
            let reduced = transitive_reduce(&backbone)?;
            if !reduced.removed.is_empty() {
                return Err(Error::Integrity(format!(
                    "backbone marked parsimonious still has {} redundant edges",
                    reduced.removed.len()
                )));
            }
            return Ok(reduced);
        }
        Ok(backbone)
    }

    pub fn tags(&self) -> &Arc<[String]> {
        &self.tags
    }

    pub fn tag(&self, index: u32) -> &str {
        &self.tags[index as usize]
    }

    pub fn alpha_threshold(&self) -> f64 {
        self.alpha_th
    }

    pub fn edges(&self) -> &[BackboneEdge] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_parsimonious(&self) -> bool {
        self.parsimonious
    }

    /// Edges dropped by transitive reduction, in their original order.
    pub fn removed(&self) -> &[BackboneEdge] {
        &self.removed
    }

    pub fn edge_names(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges
            .iter()
            .map(|e| (self.tag(e.source), self.tag(e.target)))
    }

    /// The edge set as a graph over the tags it touches, with the index map
    /// back to tag indices.
    fn compact_digraph(&self) -> (Digraph, Vec<u32>) {
        let mut nodes: Vec<u32> = self
            .edges
            .iter()
            .flat_map(|e| [e.source, e.target])
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        let local = |t: u32| nodes.binary_search(&t).expect("endpoint indexed");
        let g = Digraph::from_edges(
            nodes.len(),
            self.edges
                .iter()
                .map(|e| (local(e.source), local(e.target))),
        );
        (g, nodes)
    }

    /// Checks acyclicity independently of the frequency ordering.
    pub fn check_acyclic(&self) -> Result<()> {
        let (g, nodes) = self.compact_digraph();
        match g.find_cycle() {
            None => Ok(()),
            Some(cycle) => Err(Error::Cycle(
                cycle
                    .into_iter()
                    .map(|i| self.tag(nodes[i]).to_owned())
                    .collect(),
            )),
        }
    }
}

/// Builds the backbone of `p` at `alpha_th`.
pub fn build_backbone(p: &PrunedGraph, alpha_th: f64) -> Result<HierarchicalBackbone> {
    ScoredPairs::new(p).backbone(alpha_th)
}

/// Removes every edge `u -> w` for which a longer path `u ~> w` exists.
/// Weights play no part. Dropped edges are appended to the audit list.
pub fn transitive_reduce(h: &HierarchicalBackbone) -> Result<HierarchicalBackbone> {
    let (g, nodes) = h.compact_digraph();
    let reduction = g.transitive_reduction().map_err(|cycle| {
        Error::Cycle(
            cycle
                .into_iter()
                .map(|i| h.tag(nodes[i]).to_owned())
                .collect(),
        )
    })?;
    let local = |t: u32| nodes.binary_search(&t).expect("endpoint indexed");
    let mut edges = Vec::with_capacity(reduction.graph.edge_count());
    let mut removed = h.removed.clone();
    for e in &h.edges {
        if reduction.graph.has_edge(local(e.source), local(e.target)) {
            edges.push(*e);
        } else {
            removed.push(*e);
        }
    }
    Ok(HierarchicalBackbone {
        tags: Arc::clone(&h.tags),
        alpha_th: h.alpha_th,
        edges,
        parsimonious: true,
        removed,
    })
}
