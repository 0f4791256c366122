use rayon::prelude::*;

use crate::decomposition::{validate_tree_decomposition, TreeDecomposition};
use crate::error::{invalid, Error, Result};
use crate::graph::{distances_from, VertexSet, WeightedGraph};
use crate::partition::OrderedPartition;

/// A ball of the layered graph: its topmost bag and the projected sets it
/// generated, in creation order.
struct Cluster {
    top: usize,
    generated: Vec<Vec<usize>>,
}

/// Layered-graph clustering over a tree decomposition with `delta = rho/2`.
/// Parts have weak diameter at most `rho`.
pub fn partition_from_tree_decomposition(
    g: &WeightedGraph,
    td: &TreeDecomposition,
    rho: f64,
) -> Result<OrderedPartition> {
    if !(rho > 0.0) || !rho.is_finite() {
        return invalid(format!("rho must be positive and finite, got {rho}"));
    }
    let report = validate_tree_decomposition(g, td);
    if !report.valid {
        return Err(Error::InvalidDecomposition(format!(
            "tree decomposition rejected: {:?}",
            report.violations
        )));
    }
    let n = g.vertex_count();
    if n == 0 {
        return OrderedPartition::new(0, Vec::new());
    }
    let delta = rho / 2.0;
    let tree = td.rooted()?;
    let k = td.max_bag_size();

    // H-vertex ids: bag by bag, in bag order.
    let mut offset = Vec::with_capacity(td.bags.len() + 1);
    let mut hv_vertex = Vec::new();
    let mut hv_node = Vec::new();
    offset.push(0);
    for (t, bag) in td.bags.iter().enumerate() {
        for v in bag.iter() {
            hv_vertex.push(v);
            hv_node.push(t);
        }
        offset.push(hv_vertex.len());
    }
    let hn = hv_vertex.len();
    let hid = |v: usize, t: usize| offset[t] + td.bags[t].as_slice().binary_search(&v).unwrap();

    let mut in_some_bag = vec![false; n];
    for &v in &hv_vertex {
        in_some_bag[v] = true;
    }
    let sources: Vec<usize> = (0..n).filter(|&v| in_some_bag[v]).collect();
    let dist: Vec<(usize, Vec<f64>)> = sources
        .par_iter()
        .map(|&v| (v, distances_from(g, [v], None, f64::INFINITY)))
        .collect();
    let mut dist_from = vec![Vec::new(); n];
    for (v, d) in dist {
        dist_from[v] = d;
    }

    let mut h = WeightedGraph::new(hn);
    for (t, bag) in td.bags.iter().enumerate() {
        let b = bag.as_slice();
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                let d = dist_from[b[i]][b[j]];
                if d.is_finite() {
                    h.add_edge(offset[t] + i, offset[t] + j, d)?;
                }
            }
        }
    }
    for &(a, b) in &td.edges {
        for v in td.bags[a].iter() {
            if td.bags[b].contains(v) {
                h.add_edge(hid(v, a), hid(v, b), 0.0)?;
            }
        }
    }

    let mut by_height: Vec<usize> = (0..td.bags.len()).collect();
    by_height.sort_by_key(|&t| (tree.depth[t], t));

    let mut color = vec![0usize; hn]; // 0 = uncolored
    let mut tops_of: Vec<Vec<usize>> = vec![Vec::new(); hn];
    let mut clusters: Vec<Cluster> = Vec::new();
    for i in 1..=k {
        loop {
            let chosen = by_height.iter().copied().find(|&t| {
                let range = offset[t]..offset[t + 1];
                !range.clone().any(|x| color[x] == i) && range.clone().any(|x| color[x] == 0)
            });
            let Some(t) = chosen else { break };
            let mut u_mask = vec![false; hn];
            for node in tree.subtree(t) {
                for x in offset[node]..offset[node + 1] {
                    u_mask[x] = !tops_of[x].iter().any(|&top| tree.is_ancestor(top, t));
                }
            }
            let w: Vec<usize> = (offset[t]..offset[t + 1]).filter(|&x| u_mask[x]).collect();
            let ball = distances_from(&h, w.iter().copied(), Some(&u_mask), delta);
            let members: Vec<usize> = (0..hn).filter(|&x| ball[x] <= delta).collect();
            for &x in &members {
                if color[x] == 0 {
                    color[x] = i;
                }
                tops_of[x].push(t);
            }
            let generated = w
                .iter()
                .map(|&x| {
                    let d = distances_from(&h, [x], Some(&u_mask), delta);
                    let proj: VertexSet = (0..hn).filter(|&y| d[y] <= delta).map(|y| hv_vertex[y]).collect();
                    proj.into_vec()
                })
                .collect();
            clusters.push(Cluster { top: t, generated });
        }
    }
    if let Some(x) = color.iter().position(|&c| c == 0) {
        return Err(Error::Unreachable(format!(
            "layered vertex ({}, bag {}) left uncolored",
            hv_vertex[x], hv_node[x]
        )));
    }

    let mut order: Vec<usize> = (0..clusters.len()).collect();
    order.sort_by_key(|&c| (tree.depth[clusters[c].top], clusters[c].top, c));
    let mut taken = vec![false; n];
    let mut parts = Vec::new();
    for c in order {
        for y in &clusters[c].generated {
            let rest: Vec<usize> = y.iter().copied().filter(|&v| !taken[v]).collect();
            for &v in &rest {
                taken[v] = true;
            }
            if !rest.is_empty() {
                parts.push(VertexSet::new(rest));
            }
        }
    }
    OrderedPartition::new(n, parts)
}
