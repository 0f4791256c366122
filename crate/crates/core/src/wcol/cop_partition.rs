use serde::Serialize;

use crate::decomposition::BufferedCopDecomposition;
use crate::error::{invalid, Result};
use crate::graph::{
    distances_from, greedy_maximal_scattered_within, labelled_search, VertexSet, WeightedGraph,
};
use crate::partition::OrderedPartition;

#[derive(Debug, Clone, Serialize)]
pub struct CopPartition {
    pub partition: OrderedPartition,
    /// Every vertex lay within `rho/4` of its skeleton inside its supernode.
    pub radius_ok: bool,
}

/// Splits every supernode around a greedy maximal `rho/4`-scattered set of
/// skeleton vertices, assigning each vertex to its nearest center inside
/// the supernode (ties to the earlier center). Parts are ordered by
/// supernode depth, supernode id, then center rank, so ancestors come
/// first.
pub fn partition_from_cop_decomposition(
    g: &WeightedGraph,
    bcd: &BufferedCopDecomposition,
    rho: f64,
) -> Result<CopPartition> {
    if !(rho > 0.0) || !rho.is_finite() {
        return invalid(format!("rho must be positive and finite, got {rho}"));
    }
    let n = g.vertex_count();
    let delta = rho / 4.0;
    let tree = bcd.tree();
    let sn = bcd.supernodes();
    let mut order: Vec<usize> = (0..sn.len()).collect();
    order.sort_by_key(|&i| (tree.depth[i], sn[i].id));

    let mut parts = Vec::new();
    let mut radius_ok = true;
    for i in order {
        let s = &sn[i];
        if s.vertices.is_empty() {
            continue;
        }
        if s.vertices.iter().any(|v| v >= n) {
            return invalid(format!("supernode {} holds an out-of-range vertex", s.id));
        }
        let mask = s.vertices.mask(n);
        let skeleton: VertexSet = s
            .skeleton_vertices()
            .iter()
            .filter(|&v| v < n && mask[v])
            .collect();
        let centers = greedy_maximal_scattered_within(g, &skeleton, delta, Some(&mask));
        let search = labelled_search(
            g,
            centers.iter().enumerate().map(|(rank, c)| (c, rank)),
            Some(&mask),
            f64::INFINITY,
        );
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
        let mut stray = Vec::new();
        let skel_dist = distances_from(g, skeleton.iter(), Some(&mask), delta);
        for v in s.vertices.iter() {
            if skel_dist[v] > delta {
                radius_ok = false;
            }
            if search.dist[v].is_finite() {
                buckets[search.label[v]].push(v);
            } else {
                stray.push(v);
            }
        }
        parts.extend(buckets.into_iter().map(VertexSet::new));
        parts.extend(stray.into_iter().map(VertexSet::singleton));
    }
    Ok(CopPartition {
        partition: OrderedPartition::new(n, parts)?,
        radius_ok,
    })
}
