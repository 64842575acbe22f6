//! Seeded instance families. Output depends only on the family parameters.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Edge, ReachIndex, Vertex};

/// Which endpoint of every demand pair is drawn from the designated set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SharedSide {
    /// `P ⊆ S × V`
    Sources,
    /// `P ⊆ V × S`
    Sinks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InstanceFamily {
    RandomDag {
        n: usize,
        density: f64,
        pairs: usize,
        seed: u64,
    },
    Layered {
        layers: usize,
        width: usize,
        density: f64,
        pairs: usize,
        seed: u64,
    },
    PathUnion {
        paths: usize,
        length: usize,
        seed: u64,
    },
    Sourcewise {
        n: usize,
        density: f64,
        sigma: usize,
        side: SharedSide,
        pairs: usize,
        seed: u64,
    },
    /// Arbitrary digraph, usually cyclic.
    RandomDigraph {
        n: usize,
        density: f64,
        pairs: usize,
        seed: u64,
    },
}

impl InstanceFamily {
    pub fn kind(&self) -> &'static str {
        match self {
            InstanceFamily::RandomDag { .. } => "random-dag",
            InstanceFamily::Layered { .. } => "layered",
            InstanceFamily::PathUnion { .. } => "path-union",
            InstanceFamily::Sourcewise { .. } => "sourcewise",
            InstanceFamily::RandomDigraph { .. } => "random-digraph",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub graph: DirectedGraph,
    pub pairs: Vec<Edge>,
    /// The shared endpoint set of a sourcewise instance.
    pub terminals: Option<Vec<Vertex>>,
}

pub fn generate(family: &InstanceFamily) -> Result<Instance> {
    match *family {
        InstanceFamily::RandomDag { n, density, pairs, seed } => {
            check(n >= 1, "n must be at least 1")?;
            check_density(density)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let graph = random_dag(n, density, &mut rng);
            let pairs = sample_pairs(&graph, pairs, &mut rng);
            Ok(Instance { graph, pairs, terminals: None })
        }
        InstanceFamily::Layered { layers, width, density, pairs, seed } => {
            check(layers >= 1 && width >= 1, "layers and width must be at least 1")?;
            check_density(density)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = layers * width;
            let mut edges = Vec::new();
            for l in 0..layers.saturating_sub(1) {
                for a in 0..width {
                    for b in 0..width {
                        if rng.gen_bool(density) {
                            edges.push((l * width + a, (l + 1) * width + b));
                        }
                    }
                }
            }
            let graph = DirectedGraph::from_edges(n, edges)?;
            let pairs = sample_pairs(&graph, pairs, &mut rng);
            Ok(Instance { graph, pairs, terminals: None })
        }
        InstanceFamily::PathUnion { paths, length, seed } => {
            check(paths >= 1 && length >= 1, "paths and length must be at least 1")?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = paths * length;
            let mut ids: Vec<Vertex> = (0..n).collect();
            ids.shuffle(&mut rng);
            let mut edges = Vec::new();
            let mut pairs = Vec::new();
            for chunk in ids.chunks(length) {
                edges.extend(chunk.windows(2).map(|w| (w[0], w[1])));
                pairs.push((chunk[0], chunk[length - 1]));
            }
            pairs.shuffle(&mut rng);
            Ok(Instance { graph: DirectedGraph::from_edges(n, edges)?, pairs, terminals: None })
        }
        InstanceFamily::Sourcewise { n, density, sigma, side, pairs, seed } => {
            check(n >= 1, "n must be at least 1")?;
            check(sigma >= 1 && sigma <= n, "sigma must be in 1..=n")?;
            check_density(density)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let graph = random_dag(n, density, &mut rng);
            let mut all: Vec<Vertex> = (0..n).collect();
            all.shuffle(&mut rng);
            let mut shared = all[..sigma].to_vec();
            shared.sort_unstable();
            let reach = ReachIndex::new(&graph);
            // partners of each shared vertex, excluding itself
            let partners: Vec<Vec<Vertex>> = shared
                .iter()
                .map(|&x| {
                    (0..n)
                        .filter(|&y| {
                            y != x
                                && match side {
                                    SharedSide::Sources => reach.reaches(x, y),
                                    SharedSide::Sinks => reach.reaches(y, x),
                                }
                        })
                        .collect()
                })
                .collect();
            let usable: Vec<usize> = (0..sigma).filter(|&i| !partners[i].is_empty()).collect();
            let mut out = Vec::with_capacity(pairs);
            if !usable.is_empty() {
                for _ in 0..pairs {
                    let i = *usable.choose(&mut rng).unwrap();
                    let y = *partners[i].choose(&mut rng).unwrap();
                    out.push(match side {
                        SharedSide::Sources => (shared[i], y),
                        SharedSide::Sinks => (y, shared[i]),
                    });
                }
            }
            Ok(Instance { graph, pairs: out, terminals: Some(shared) })
        }
        InstanceFamily::RandomDigraph { n, density, pairs, seed } => {
            check(n >= 1, "n must be at least 1")?;
            check_density(density)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in 0..n {
                    if u != v && rng.gen_bool(density) {
                        edges.push((u, v));
                    }
                }
            }
            let graph = DirectedGraph::from_edges(n, edges)?;
            let pairs = sample_pairs(&graph, pairs, &mut rng);
            Ok(Instance { graph, pairs, terminals: None })
        }
    }
}

fn check(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.into()))
    }
}

fn check_density(density: f64) -> Result<()> {
    check((0.0..=1.0).contains(&density), "density must lie in [0, 1]")
}

/// DAG whose topological order is a random permutation of the ids.
fn random_dag(n: usize, density: f64, rng: &mut ChaCha8Rng) -> DirectedGraph {
    let mut order: Vec<Vertex> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                edges.push((order[i], order[j]));
            }
        }
    }
    DirectedGraph::from_edges(n, edges).expect("generated edges are valid")
}

/// `count` reachable pairs with distinct endpoints, uniformly with
/// replacement. Empty when the graph has no such pair.
fn sample_pairs(g: &DirectedGraph, count: usize, rng: &mut ChaCha8Rng) -> Vec<Edge> {
    let reach = ReachIndex::new(g);
    let pool: Vec<Edge> = reach.reachable_pairs().into_iter().filter(|(s, t)| s != t).collect();
    if pool.is_empty() {
        return Vec::new();
    }
    (0..count).map(|_| *pool.choose(rng).unwrap()).collect()
}
