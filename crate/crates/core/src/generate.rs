//! Seeded instance generators.
//!
//! All randomness comes from ChaCha8 (`rand_chacha` 0.3) seeded with
//! `seed_from_u64(seed)` and read only through `next_u64`:
//! a unit float is `(x >> 11) * 2^-53`, an index below `n` is
//! `(x * n) >> 64` in 128-bit arithmetic, and an edge weight in `[lo, hi]`
//! is `lo + round((hi - lo) * u * 1024) / 1024`. Ports that follow these
//! rules reproduce the instances exactly.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coreset::ClusteringInstance;
use crate::decomposition::TreeDecomposition;
use crate::error::{invalid, Result};
use crate::graph::{VertexSet, WeightedGraph};

pub struct Prng(ChaCha8Rng);

impl Prng {
    pub fn new(seed: u64) -> Self {
        Prng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// A weight on the 1/1024 grid inside `[lo, hi]`.
    pub fn weight(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.unit();
        lo + ((hi - lo) * u * 1024.0).round() / 1024.0
    }
}

fn check_range(lo: f64, hi: f64) -> Result<()> {
    if !(lo >= 0.0) || !(hi >= lo) || !hi.is_finite() {
        return invalid(format!("weight range [{lo}, {hi}] must satisfy 0 <= lo <= hi < inf"));
    }
    Ok(())
}

/// Random `k`-tree on `n` vertices with every edge outside the starting
/// clique kept with probability `edge_keep`, plus the width-`k` tree
/// decomposition that built it (node 0 is the starting clique, node `i`
/// introduces vertex `k + i`).
pub fn gen_partial_ktree(
    n: usize,
    k: usize,
    edge_keep: f64,
    weight_range: (f64, f64),
    seed: u64,
) -> Result<(WeightedGraph, TreeDecomposition)> {
    let (lo, hi) = weight_range;
    check_range(lo, hi)?;
    if k == 0 {
        return invalid("k must be at least 1");
    }
    if n < k + 1 {
        return invalid(format!("need n >= k + 1, got n = {n}, k = {k}"));
    }
    if !(edge_keep > 0.0 && edge_keep <= 1.0) {
        return invalid(format!("edge_keep must lie in (0, 1], got {edge_keep}"));
    }
    let mut rng = Prng::new(seed);
    let mut g = WeightedGraph::new(n);
    for u in 0..=k {
        for v in u + 1..=k {
            g.add_edge(u, v, rng.weight(lo, hi))?;
        }
    }
    let mut bags = vec![VertexSet::new((0..=k).collect())];
    let mut tree_edges = Vec::new();
    // Every k-clique with the tree node whose bag contains it.
    let mut cliques: Vec<(Vec<usize>, usize)> = (0..=k)
        .map(|skip| ((0..=k).filter(|&x| x != skip).collect(), 0))
        .collect();
    for v in k + 1..n {
        let (clique, node) = cliques[rng.below(cliques.len())].clone();
        for &u in &clique {
            if rng.unit() < edge_keep {
                g.add_edge(u, v, rng.weight(lo, hi))?;
            }
        }
        let id = bags.len();
        let mut bag = clique.clone();
        bag.push(v);
        bags.push(VertexSet::new(bag));
        tree_edges.push((node, id));
        for skip in 0..k {
            let mut c: Vec<usize> = clique.iter().copied().enumerate().filter(|&(i, _)| i != skip).map(|(_, x)| x).collect();
            c.push(v);
            cliques.push((c, id));
        }
    }
    Ok((g, TreeDecomposition::new(bags, tree_edges, 0)))
}

/// `rows x cols` grid, vertex `i * cols + j`; edges are drawn row by row,
/// right neighbour before lower neighbour.
pub fn gen_grid(rows: usize, cols: usize, weight_range: (f64, f64), seed: u64) -> Result<WeightedGraph> {
    let (lo, hi) = weight_range;
    check_range(lo, hi)?;
    if rows == 0 || cols == 0 {
        return invalid("grid needs at least one row and one column");
    }
    let mut rng = Prng::new(seed);
    let mut g = WeightedGraph::new(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let v = i * cols + j;
            if j + 1 < cols {
                g.add_edge(v, v + 1, rng.weight(lo, hi))?;
            }
            if i + 1 < rows {
                g.add_edge(v, v + cols, rng.weight(lo, hi))?;
            }
        }
    }
    Ok(g)
}

/// Every vertex a client, `facilities` of them drawn as facilities by a
/// partial Fisher-Yates shuffle (`below(n - i)` at step `i`).
pub fn gen_clustering_instance(
    g: WeightedGraph,
    facilities: usize,
    k: usize,
    seed: u64,
) -> Result<ClusteringInstance> {
    let n = g.vertex_count();
    if facilities == 0 || facilities > n {
        return invalid(format!("need 1 <= facilities <= {n}, got {facilities}"));
    }
    let mut rng = Prng::new(seed);
    let mut ids: Vec<usize> = (0..n).collect();
    for i in 0..facilities {
        let j = i + rng.below(n - i);
        ids.swap(i, j);
    }
    let fac = VertexSet::new(ids[..facilities].to_vec());
    ClusteringInstance::new(g, VertexSet::all(n), fac, k)
}
