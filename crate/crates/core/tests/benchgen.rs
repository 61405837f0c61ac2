use std::collections::VecDeque;

use hbackbone::benchgen::{generate, generate_objects, BenchmarkConfig};
use hbackbone::ingest::ReferenceHierarchy;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Balanced tree with branching 3 and depth 3: 1 + 3 + 9 + 27 = 40 nodes.
fn tree40() -> ReferenceHierarchy {
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    let mut next = 1;
    for _ in 0..3 {
        let mut deeper = Vec::new();
        for &p in &frontier {
            for _ in 0..3 {
                edges.push((format!("t{p}"), format!("t{next}")));
                deeper.push(next);
                next += 1;
            }
        }
        frontier = deeper;
    }
    ReferenceHierarchy::from_edge_list(&edges).unwrap()
}

fn bfs_distances(h: &ReferenceHierarchy, from: usize) -> Vec<usize> {
    let mut adj = vec![Vec::new(); h.node_count()];
    for e in h.edges() {
        adj[e.parent].push(e.child);
        adj[e.child].push(e.parent);
    }
    let mut dist = vec![usize::MAX; h.node_count()];
    dist[from] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

fn chi_square_p(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64)
        .unwrap()
        .cdf(stat)
}

#[test]
fn walk_tags_stay_within_walk_length() {
    let h = tree40();
    let cfg = BenchmarkConfig::new(1000, 1.0, 17);
    let objects = generate_objects(&h, &cfg).unwrap();
    assert_eq!(objects.len(), 1000);
    for obj in &objects {
        let dist = bfs_distances(&h, obj.reference());
        assert!((3..=5).contains(&obj.tags.len()));
        for &t in &obj.tags[1..] {
            assert!(
                dist[t] >= 1 && dist[t] <= cfg.walk_max,
                "tag {t} at distance {}",
                dist[t]
            );
        }
    }
}

#[test]
fn uniform_tags_pass_chi_square() {
    let h = tree40();
    let objects = generate_objects(&h, &BenchmarkConfig::new(100_000, 0.0, 5)).unwrap();
    let mut reference = vec![0u64; 40];
    let mut all = vec![0u64; 40];
    let mut sizes = [0u64; 3];
    for obj in &objects {
        reference[obj.reference()] += 1;
        for &t in &obj.tags {
            all[t] += 1;
        }
        sizes[obj.tags.len() - 3] += 1;
    }
    for (name, counts) in [
        ("reference", &reference[..]),
        ("all", &all[..]),
        ("sizes", &sizes[..]),
    ] {
        let p = chi_square_p(counts);
        assert!(p > 0.01, "{name}: p = {p}");
    }
}

#[test]
fn output_independent_of_worker_count() {
    let h = tree40();
    let cfg = BenchmarkConfig::new(5000, 0.7, 99);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| generate(&h, &cfg).unwrap())
    };
    assert_eq!(run(1), run(4));
}
