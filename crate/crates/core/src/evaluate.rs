//! Scoring predicted backbones against a reference hierarchy.
//!
//! *Edge* mode counts a predicted edge `u -> v` as a true positive when the
//! reference has that exact edge. *Path* mode accepts any directed reference
//! path `u ~> v`, and counts a reference edge as recovered when the
//! prediction contains a directed path between its endpoints.
//!
//! Negatives for the false-positive rate are the ordered pairs of distinct
//! reference nodes minus the reference edges (edge mode) or minus the
//! reachable pairs (path mode). Raw counts are always reported next to the
//! ratios.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backbone::{transitive_reduce, HierarchicalBackbone, PrunedGraph, ScoredPairs};
use crate::dag::Digraph;
use crate::error::{Error, Result};
use crate::ingest::ReferenceHierarchy;
use crate::io::format_float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Edge,
    Path,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Edge => "edge",
            Mode::Path => "path",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge" => Ok(Mode::Edge),
            "path" => Ok(Mode::Path),
            other => Err(Error::Config(format!("unknown evaluation mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: Mode,
    pub z_th: Option<f64>,
    pub alpha_th: Option<f64>,
    pub tp: usize,
    pub fp: usize,
    /// False positives with both endpoints inside the scored node universe;
    /// the numerator of `fpr`.
    pub fp_in_universe: usize,
    pub n_predicted_edges: usize,
    pub n_reference_edges: usize,
    /// Reference edges recovered by the prediction.
    pub recovered: usize,
    pub n_negatives: usize,
    pub tpr: f64,
    pub fpr: f64,
    pub precision: f64,
    pub recall: f64,
    /// Set when there were no predictions and `precision` is 1 by convention.
    pub empty_prediction: bool,
    /// Predicted endpoints missing from the reference; their edges are false
    /// positives.
    pub unknown_nodes: Vec<String>,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str =
        "alpha_th,z_th,mode,tp,fp,n_pred,n_ref,tpr,fpr,precision,recall,recovered,n_negatives";

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            opt(self.alpha_th),
            opt(self.z_th),
            self.mode,
            self.tp,
            self.fp,
            self.n_predicted_edges,
            self.n_reference_edges,
            format_float(self.tpr),
            format_float(self.fpr),
            format_float(self.precision),
            format_float(self.recall),
            self.recovered,
            self.n_negatives
        )
    }
}

/// Reference hierarchy with its reachability relation computed once, shared
/// across every prediction scored against it.
#[derive(Debug, Clone)]
pub struct ReferenceIndex<'a> {
    reference: &'a ReferenceHierarchy,
    /// Strict descendants per node.
    closure: Vec<FixedBitSet>,
    /// Node universe used for recall and negatives.
    universe: FixedBitSet,
}

impl<'a> ReferenceIndex<'a> {
    pub fn new(reference: &'a ReferenceHierarchy) -> Self {
        let closure = reference
            .graph()
            .descendants()
            .expect("reference hierarchies are validated acyclic");
        let mut universe = FixedBitSet::with_capacity(reference.node_count());
        universe.insert_range(..);
        ReferenceIndex {
            reference,
            closure,
            universe,
        }
    }

    /// Restricts recall and negatives to reference nodes named in
    /// `observed`. Paths may still run through unobserved nodes.
    pub fn restricted_to<I, S>(mut self, observed: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.universe.clear();
        for name in observed {
            if let Some(i) = self.reference.index_of(name.as_ref()) {
                self.universe.insert(i);
            }
        }
        self
    }

    pub fn reference(&self) -> &ReferenceHierarchy {
        self.reference
    }

    pub fn reaches(&self, from: usize, to: usize) -> bool {
        self.closure[from].contains(to)
    }

    fn in_universe(&self, node: usize) -> bool {
        self.universe.contains(node)
    }

    fn universe_size(&self) -> usize {
        self.universe.count_ones(..)
    }

    fn reference_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.reference
            .edges()
            .iter()
            .map(|e| (e.parent, e.child))
            .filter(|&(p, c)| self.in_universe(p) && self.in_universe(c))
    }

    fn closed_pairs_in_universe(&self) -> usize {
        self.universe
            .ones()
            .map(|u| self.closure[u].intersection(&self.universe).count())
            .sum()
    }
}

pub fn score_edges(predicted: &HierarchicalBackbone, reference: &ReferenceHierarchy) -> EvalReport {
    score(predicted, &ReferenceIndex::new(reference), Mode::Edge)
}

pub fn score_paths(predicted: &HierarchicalBackbone, reference: &ReferenceHierarchy) -> EvalReport {
    score(predicted, &ReferenceIndex::new(reference), Mode::Path)
}

pub fn score(
    predicted: &HierarchicalBackbone,
    index: &ReferenceIndex<'_>,
    mode: Mode,
) -> EvalReport {
    let reference = index.reference();
    let to_ref: Vec<Option<usize>> = predicted
        .tags()
        .iter()
        .map(|t| reference.index_of(t))
        .collect();

    let mut unknown = Vec::new();
    let (mut tp, mut fp, mut fp_in_universe) = (0, 0, 0);
    for e in predicted.edges() {
        let (s, t) = (to_ref[e.source as usize], to_ref[e.target as usize]);
        for (raw, mapped) in [(e.source, s), (e.target, t)] {
            if mapped.is_none() {
                unknown.push(predicted.tag(raw).to_owned());
            }
        }
        let hit = match (s, t) {
            (Some(s), Some(t)) => match mode {
                Mode::Edge => reference.graph().has_edge(s, t),
                Mode::Path => index.reaches(s, t),
            },
            _ => false,
        };
        if hit {
            tp += 1;
        } else {
            fp += 1;
            if let (Some(s), Some(t)) = (s, t) {
                if index.in_universe(s) && index.in_universe(t) {
                    fp_in_universe += 1;
                }
            }
        }
    }
    unknown.sort();
    unknown.dedup();

    let reference_edges: Vec<(usize, usize)> = index.reference_edges().collect();
    let (predicted_graph, local_nodes) = predicted_digraph(predicted);
    let ref_to_local: HashMap<usize, usize> = local_nodes
        .iter()
        .enumerate()
        .filter_map(|(l, &t)| to_ref[t as usize].map(|r| (r, l)))
        .collect();
    let reach = (mode == Mode::Path).then(|| {
        predicted_graph
            .descendants()
            .expect("backbones are acyclic")
    });
    let recovered = reference_edges
        .iter()
        .filter(|(p, c)| match (ref_to_local.get(p), ref_to_local.get(c)) {
            (Some(&p), Some(&c)) => match &reach {
                Some(reach) => reach[p].contains(c),
                None => predicted_graph.has_edge(p, c),
            },
            _ => false,
        })
        .count();

    let n_universe = index.universe_size();
    let all_pairs = n_universe * n_universe.saturating_sub(1);
    let positives = match mode {
        Mode::Edge => reference_edges.len(),
        Mode::Path => index.closed_pairs_in_universe(),
    };
    let n_negatives = all_pairs - positives;

    let n_pred = predicted.edges().len();
    let n_ref = reference_edges.len();
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let recall = ratio(recovered, n_ref);
    EvalReport {
        mode,
        z_th: None,
        alpha_th: Some(predicted.alpha_threshold()),
        tp,
        fp,
        fp_in_universe,
        n_predicted_edges: n_pred,
        n_reference_edges: n_ref,
        recovered,
        n_negatives,
        tpr: recall,
        fpr: ratio(fp_in_universe, n_negatives),
        precision: if n_pred == 0 {
            1.0
        } else {
            tp as f64 / n_pred as f64
        },
        recall,
        empty_prediction: n_pred == 0,
        unknown_nodes: unknown,
    }
}

/// Digraph over the backbone's edge endpoints and the tag index of each
/// local node.
fn predicted_digraph(h: &HierarchicalBackbone) -> (Digraph, Vec<u32>) {
    let mut nodes: Vec<u32> = h
        .edges()
        .iter()
        .flat_map(|e| [e.source, e.target])
        .collect();
    nodes.sort_unstable();
    nodes.dedup();
    let local = |t: u32| nodes.binary_search(&t).expect("endpoint indexed");
    let graph = Digraph::from_edges(
        nodes.len(),
        h.edges().iter().map(|e| (local(e.source), local(e.target))),
    );
    (graph, nodes)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    /// Reduce each backbone before scoring. Predicted-edge counts are then no
    /// longer guaranteed monotone in `alpha_th`.
    pub parsimonious: bool,
}

/// One report per grid value, in grid order.
pub fn sweep(
    pruned: &PrunedGraph,
    index: &ReferenceIndex<'_>,
    alpha_grid: &[f64],
    mode: Mode,
) -> Result<Vec<EvalReport>> {
    let scored = ScoredPairs::new(pruned);
    sweep_scored(
        &scored,
        pruned.z_threshold(),
        index,
        alpha_grid,
        &[mode],
        SweepOptions::default(),
    )
}

/// Sweeps a pre-scored pair list over `alpha_grid` for each of `modes`.
/// Reports are ordered by grid value, then by mode.
pub fn sweep_scored(
    scored: &ScoredPairs,
    z_th: f64,
    index: &ReferenceIndex<'_>,
    alpha_grid: &[f64],
    modes: &[Mode],
    options: SweepOptions,
) -> Result<Vec<EvalReport>> {
    validate_grid(alpha_grid)?;
    let per_point: Vec<Vec<EvalReport>> = alpha_grid
        .par_iter()
        .map(|&alpha_th| -> Result<Vec<EvalReport>> {
            let mut backbone = scored.backbone(alpha_th)?;
            if options.parsimonious {
                backbone = transitive_reduce(&backbone)?;
            }
            Ok(modes
                .iter()
                .map(|&mode| {
                    let mut r = score(&backbone, index, mode);
                    r.z_th = Some(z_th);
                    r
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

pub fn validate_grid(alpha_grid: &[f64]) -> Result<()> {
    if alpha_grid.is_empty() {
        return Err(Error::Config("alpha grid is empty".into()));
    }
    if let Some(bad) = alpha_grid.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(Error::Config(format!(
            "alpha grid values must be positive, got {bad}"
        )));
    }
    if alpha_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "alpha grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}
