//! Semi-synthetic object–tag networks planted from a reference hierarchy.
//!
//! Each virtual object gets a uniform number of tags in
//! `[tags_min, tags_max]`. The first tag (its reference term) is uniform over
//! the hierarchy's nodes. Each further tag is, with probability `p_rw`, the
//! end point of an `s`-step random walk from the reference term over the
//! undirected hierarchy (`s` uniform in `[walk_min, walk_max]`), and otherwise
//! a uniform node. A draw that repeats a tag the object already has is
//! redrawn, flipping the walk/uniform coin again, up to [`MAX_REDRAWS`]
//! times; after that a uniform unused node is taken.
//!
//! # Random numbers
//!
//! Object `i` of ensemble `e` draws from its own ChaCha8 stream: key =
//! `seed` (8 bytes LE) ‖ `e` (8 bytes LE) ‖ `b"hbackbone/bench/"`, stream id
//! = `i`, starting at word 0. Output therefore depends on
//! `(seed, ensemble_index, config)` only, not on the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BipartiteBuilder, BipartiteGraph};
use crate::ingest::ReferenceHierarchy;

pub const MAX_REDRAWS: usize = 50;

pub const RNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha); key = seed_le64 || ensemble_le64 || \"hbackbone/bench/\"; stream = object index";

const KEY_DOMAIN: &[u8; 16] = b"hbackbone/bench/";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub n_products: usize,
    pub p_rw: f64,
    #[serde(default = "default_tags_min")]
    pub tags_min: usize,
    #[serde(default = "default_tags_max")]
    pub tags_max: usize,
    #[serde(default = "default_walk_min")]
    pub walk_min: usize,
    #[serde(default = "default_walk_max")]
    pub walk_max: usize,
    pub seed: u64,
    #[serde(default)]
    pub ensemble_index: u64,
}

fn default_tags_min() -> usize {
    3
}
fn default_tags_max() -> usize {
    5
}
fn default_walk_min() -> usize {
    1
}
fn default_walk_max() -> usize {
    3
}

impl BenchmarkConfig {
    /// Config with 3–5 tags per object and 1–3 walk steps.
    pub fn new(n_products: usize, p_rw: f64, seed: u64) -> Self {
        BenchmarkConfig {
            n_products,
            p_rw,
            tags_min: default_tags_min(),
            tags_max: default_tags_max(),
            walk_min: default_walk_min(),
            walk_max: default_walk_max(),
            seed,
            ensemble_index: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_rw) {
            return Err(Error::Config(format!(
                "p_rw must lie in [0, 1], got {}",
                self.p_rw
            )));
        }
        if self.n_products == 0 {
            return Err(Error::Config("n_products must be at least 1".into()));
        }
        if self.tags_min == 0 || self.tags_min > self.tags_max {
            return Err(Error::Config(format!(
                "need 1 <= tags_min <= tags_max, got {}..{}",
                self.tags_min, self.tags_max
            )));
        }
        if self.walk_min == 0 || self.walk_min > self.walk_max {
            return Err(Error::Config(format!(
                "need 1 <= walk_min <= walk_max, got {}..{}",
                self.walk_min, self.walk_max
            )));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("benchmark config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn object_rng(&self, object: usize) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.ensemble_index.to_le_bytes());
        key[16..].copy_from_slice(KEY_DOMAIN);
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(object as u64);
        rng
    }
}

/// Tags of one virtual object as hierarchy node indices; `tags[0]` is the
/// reference term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedObject {
    pub tags: Vec<usize>,
}

impl GeneratedObject {
    pub fn reference(&self) -> usize {
        self.tags[0]
    }
}

struct Walker<'a> {
    neighbors: &'a [Vec<usize>],
    cfg: &'a BenchmarkConfig,
}

impl Walker<'_> {
    fn walk(&self, start: usize, rng: &mut ChaCha8Rng) -> usize {
        let steps = rng.random_range(self.cfg.walk_min..=self.cfg.walk_max);
        let mut at = start;
        for _ in 0..steps {
            let next = &self.neighbors[at];
            if next.is_empty() {
                break;
            }
            at = next[rng.random_range(0..next.len())];
        }
        at
    }

    fn object(&self, index: usize) -> GeneratedObject {
        let n_nodes = self.neighbors.len();
        let mut rng = self.cfg.object_rng(index);
        let count = rng
            .random_range(self.cfg.tags_min..=self.cfg.tags_max)
            .min(n_nodes);
        let reference = rng.random_range(0..n_nodes);
        let mut tags = Vec::with_capacity(count);
        tags.push(reference);
        while tags.len() < count {
            let mut picked = None;
            for _ in 0..=MAX_REDRAWS {
                let candidate = if rng.random_bool(self.cfg.p_rw) {
                    self.walk(reference, &mut rng)
                } else {
                    rng.random_range(0..n_nodes)
                };
                if !tags.contains(&candidate) {
                    picked = Some(candidate);
                    break;
                }
            }
            let tag = picked.unwrap_or_else(|| {
                let unused: Vec<usize> = (0..n_nodes).filter(|t| !tags.contains(t)).collect();
                unused[rng.random_range(0..unused.len())]
            });
            tags.push(tag);
        }
        GeneratedObject { tags }
    }
}

/// Draws the objects of one benchmark network, keeping the reference term of
/// each object.
pub fn generate_objects(
    h: &ReferenceHierarchy,
    cfg: &BenchmarkConfig,
) -> Result<Vec<GeneratedObject>> {
    cfg.validate()?;
    if h.is_empty() {
        return Err(Error::Config("reference hierarchy has no nodes".into()));
    }
    let neighbors = h.undirected_neighbors();
    let walker = Walker {
        neighbors: &neighbors,
        cfg,
    };
    Ok((0..cfg.n_products)
        .into_par_iter()
        .map(|i| walker.object(i))
        .collect())
}

pub fn object_name(index: usize) -> String {
    format!("obj{index}")
}

pub fn generate(h: &ReferenceHierarchy, cfg: &BenchmarkConfig) -> Result<BipartiteGraph> {
    let objects = generate_objects(h, cfg)?;
    to_bipartite(h, &objects)
}

pub fn to_bipartite(h: &ReferenceHierarchy, objects: &[GeneratedObject]) -> Result<BipartiteGraph> {
    let mut builder = BipartiteBuilder::new();
    let mut record = 0;
    for (i, obj) in objects.iter().enumerate() {
        let name = object_name(i);
        for &t in &obj.tags {
            record += 1;
            builder.add_edge(record, &name, h.node(t))?;
        }
    }
    builder.build()
}

/// `n_ensembles` networks; network `i` uses `ensemble_index = i`.
pub fn generate_ensemble(
    h: &ReferenceHierarchy,
    template: &BenchmarkConfig,
    n_ensembles: usize,
) -> Result<Vec<BipartiteGraph>> {
    if n_ensembles == 0 {
        return Err(Error::Config("need at least one ensemble".into()));
    }
    (0..n_ensembles)
        .map(|i| {
            let cfg = BenchmarkConfig {
                ensemble_index: i as u64,
                ..template.clone()
            };
            generate(h, &cfg)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_hierarchy(n: usize) -> ReferenceHierarchy {
        let edges: Vec<(String, String)> = (1..n)
            .map(|i| (format!("n{}", i - 1), format!("n{i}")))
            .collect();
        ReferenceHierarchy::from_edge_list(&edges).unwrap()
    }

    #[test]
    fn config_validation() {
        let mut cfg = BenchmarkConfig::new(10, 0.5, 1);
        assert!(cfg.validate().is_ok());
        cfg.p_rw = 1.5;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = BenchmarkConfig::new(10, 0.5, 1);
        cfg.tags_min = 6;
        assert!(cfg.validate().is_err());
        let mut cfg = BenchmarkConfig::new(10, 0.5, 1);
        cfg.walk_min = 0;
        assert!(cfg.validate().is_err());
        assert!(BenchmarkConfig::new(0, 0.5, 1).validate().is_err());
    }

    #[test]
    fn config_toml_round_trip() {
        let cfg = BenchmarkConfig {
            ensemble_index: 7,
            ..BenchmarkConfig::new(1000, 0.9, 42)
        };
        assert_eq!(BenchmarkConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn isolated_reference_falls_back_to_unused_terms() {
        let h = ReferenceHierarchy::new(
            (0..6).map(|i| format!("n{i}")).collect(),
            Vec::<(String, String, crate::ingest::Relation)>::new(),
        )
        .unwrap();
        let cfg = BenchmarkConfig::new(200, 1.0, 3);
        for obj in generate_objects(&h, &cfg).unwrap() {
            let mut t = obj.tags.clone();
            t.sort_unstable();
            t.dedup();
            assert_eq!(t.len(), obj.tags.len());
            assert!((3..=5).contains(&t.len()));
        }
    }

    #[test]
    fn tag_count_capped_by_hierarchy_size() {
        let h = path_hierarchy(2);
        let objs = generate_objects(&h, &BenchmarkConfig::new(50, 0.5, 9)).unwrap();
        assert!(objs.iter().all(|o| o.tags.len() == 2));
    }

    #[test]
    fn ensembles_differ_and_singleton_matches_generate() {
        let h = path_hierarchy(30);
        let cfg = BenchmarkConfig::new(300, 0.7, 11);
        let ens = generate_ensemble(&h, &cfg, 2).unwrap();
        assert_ne!(ens[0], ens[1]);
        let one = generate_ensemble(&h, &cfg, 1).unwrap();
        assert_eq!(one, vec![generate(&h, &cfg).unwrap()]);
        assert!(generate_ensemble(&h, &cfg, 0).is_err());
    }
}
