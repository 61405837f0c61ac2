//! Directed graphs over dense node indices: topological ordering, cycle
//! extraction, reachability and transitive reduction.
//!
//! Everything above this module (reference hierarchies, backbones, scoring)
//! works on string identifiers and maps them to `0..n` before calling in here.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;

/// Simple directed graph stored as sorted, deduplicated child lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    children: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph {
            children: vec![Vec::new(); n],
        }
    }

    /// Builds a graph on `n` nodes. Duplicate edges collapse.
    ///
    /// # Panics
    /// If an endpoint is `>= n`.
    pub fn from_edges<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut children = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range for {n} nodes");
            children[u].push(v);
        }
        for list in &mut children {
            list.sort_unstable();
            list.dedup();
        }
        Digraph { children }
    }

    pub fn node_count(&self) -> usize {
        self.children.len()
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    pub fn children(&self, u: usize) -> &[usize] {
        &self.children[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.children[u].binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.children
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().map(move |&v| (u, v)))
    }

    /// Kahn's algorithm, ties broken by ascending index so the order is
    /// deterministic. On failure returns one directed cycle as a node
    /// sequence `c0 -> c1 -> ... -> c0` (first node not repeated).
    pub fn topological_order(&self) -> Result<Vec<usize>, Vec<usize>> {
        let n = self.node_count();
        let mut indegree = vec![0usize; n];
        for (_, v) in self.edges() {
            indegree[v] += 1;
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&u| indegree[u] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &v in &self.children[u] {
                indegree[v] -= 1;
                if indegree[v] == 0 {
                    queue.push_back(v);
                }
            }
        }
        if order.len() == n {
            return Ok(order);
        }

        // Every unprocessed node still has an unprocessed parent, so walking
        // parents from any of them must revisit a node.
        let mut done = vec![false; n];
        for &u in &order {
            done[u] = true;
        }
        let mut parent = vec![usize::MAX; n];
        for (u, v) in self.edges() {
            if !done[u] && !done[v] && parent[v] == usize::MAX {
                parent[v] = u;
            }
        }
        let start = (0..n).find(|&u| !done[u]).expect("unprocessed node");
        let mut seen = vec![usize::MAX; n];
        let mut walk = Vec::new();
        let mut cur = start;
        while seen[cur] == usize::MAX {
            seen[cur] = walk.len();
            walk.push(cur);
            cur = parent[cur];
        }
        let mut cycle = walk.split_off(seen[cur]);
        // parent walk runs against edge direction
        cycle.reverse();
        Err(cycle)
    }

    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        self.topological_order().err()
    }

    /// Strict descendants of every node (`reach[u]` never contains `u`).
    pub fn descendants(&self) -> Result<Vec<FixedBitSet>, Vec<usize>> {
        let order = self.topological_order()?;
        Ok(self.descendants_in_order(&order))
    }

    fn descendants_in_order(&self, order: &[usize]) -> Vec<FixedBitSet> {
        let n = self.node_count();
        let mut reach = vec![FixedBitSet::with_capacity(n); n];
        for &u in order.iter().rev() {
            let mut acc = FixedBitSet::with_capacity(n);
            for &c in &self.children[u] {
                acc.insert(c);
                acc.union_with(&reach[c]);
            }
            reach[u] = acc;
        }
        reach
    }

    /// Splits the edge set into the transitive reduction and the edges it
    /// drops. An edge `u -> w` is dropped iff `w` is reachable from another
    /// child of `u`. For a DAG the reduction is unique.
    pub fn transitive_reduction(&self) -> Result<Reduction, Vec<usize>> {
        let order = self.topological_order()?;
        let reach = self.descendants_in_order(&order);
        let n = self.node_count();
        let mut kept = Digraph::new(n);
        let mut removed = Vec::new();
        let mut via_child = FixedBitSet::with_capacity(n);
        for u in 0..n {
            via_child.clear();
            for &c in &self.children[u] {
                via_child.union_with(&reach[c]);
            }
            for &w in &self.children[u] {
                if via_child.contains(w) {
                    removed.push((u, w));
                } else {
                    kept.children[u].push(w);
                }
            }
        }
        Ok(Reduction {
            graph: kept,
            removed,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub graph: Digraph,
    /// Redundant edges in `(source, target)` order.
    pub removed: Vec<(usize, usize)>,
}
