//! Sparse covers read off a weak-reachability table.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graph::{distances_from, set_diameter, DiameterMode, VertexSet, WeightedGraph};
use crate::partition::OrderedPartition;
use crate::wcol::weak_reach_table;

#[derive(Debug, Clone, Serialize)]
pub struct CoverFamily {
    pub r: f64,
    pub rho: f64,
    /// `sets[x]` is `D(X)` for part `x`.
    pub sets: Vec<VertexSet>,
    /// Largest weak diameter of a set divided by `r`.
    pub diameter_blowup: f64,
    /// Same with strong diameters (`+inf` if some set is disconnected).
    pub strong_blowup: f64,
    /// Largest number of sets sharing a vertex.
    pub overlap: usize,
    pub wcol_2r: usize,
    /// Every `r`-ball sits inside some set (checked exhaustively).
    pub cover_ok: bool,
    /// `4 + 3 rho / r`.
    pub blowup_bound: f64,
}

/// `D(X)` = union of the parts `Y` with `X` weakly `2r`-reachable from `Y`.
/// Every part must have weak diameter at most `rho`.
pub fn sparse_cover(g: &WeightedGraph, p: &OrderedPartition, r: f64, rho: f64) -> Result<CoverFamily> {
    if !(r > 0.0) || !r.is_finite() {
        return invalid(format!("r must be positive and finite, got {r}"));
    }
    if !(rho >= 0.0) {
        return invalid(format!("rho must be nonnegative, got {rho}"));
    }
    p.check_graph(g)?;
    let diameters: Vec<f64> = p
        .parts()
        .par_iter()
        .map(|part| set_diameter(g, part, DiameterMode::Weak))
        .collect::<Result<_>>()?;
    if let Some(x) = diameters.iter().position(|&d| d > rho) {
        return Err(Error::InvalidArgument(format!(
            "part {x} has weak diameter {} > rho = {rho}",
            diameters[x]
        )));
    }
    let table = weak_reach_table(g, p, 2.0 * r)?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); p.len()];
    for y in 0..p.len() {
        for &x in table.reach(y) {
            members[x].extend(p.part(y).iter());
        }
    }
    let sets: Vec<VertexSet> = members.into_iter().map(VertexSet::new).collect();

    let n = g.vertex_count();
    let mut count = vec![0usize; n];
    for s in &sets {
        for v in s.iter() {
            count[v] += 1;
        }
    }
    let overlap = count.into_iter().max().unwrap_or(0);
    let masks: Vec<Vec<bool>> = sets.iter().map(|s| s.mask(n)).collect();
    let cover_ok = (0..n).into_par_iter().all(|v| {
        let d = distances_from(g, [v], None, r);
        let ball: Vec<usize> = (0..n).filter(|&u| d[u] <= r).collect();
        masks.iter().any(|m| ball.iter().all(|&u| m[u]))
    });
    let (weak, strong) = sets
        .par_iter()
        .map(|s| {
            (
                set_diameter(g, s, DiameterMode::Weak).unwrap_or(0.0),
                set_diameter(g, s, DiameterMode::Strong).unwrap_or(0.0),
            )
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    Ok(CoverFamily {
        r,
        rho,
        sets,
        diameter_blowup: weak / r,
        strong_blowup: strong / r,
        overlap,
        wcol_2r: table.wcol,
        cover_ok,
        blowup_bound: 4.0 + 3.0 * rho / r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_path_singletons() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let p = OrderedPartition::singletons(&[0, 1, 2]).unwrap();
        let c = sparse_cover(&g, &p, 1.0, 0.0).unwrap();
        let sets: Vec<Vec<usize>> = c.sets.iter().map(|s| s.as_slice().to_vec()).collect();
        assert_eq!(sets, vec![vec![0, 1, 2], vec![1, 2], vec![2]]);
        assert_eq!(c.overlap, 3);
        assert_eq!(c.wcol_2r, 3);
        assert!(c.cover_ok);
        assert!(c.diameter_blowup <= c.blowup_bound);
    }

    #[test]
    fn single_part() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let p = OrderedPartition::new(3, vec![VertexSet::all(3)]).unwrap();
        let c = sparse_cover(&g, &p, 5.0, 2.0).unwrap();
        assert_eq!(c.sets, vec![VertexSet::all(3)]);
        assert_eq!(c.overlap, 1);
    }

    #[test]
    fn rejects_wide_parts() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let p = OrderedPartition::new(3, vec![VertexSet::all(3)]).unwrap();
        assert!(sparse_cover(&g, &p, 1.0, 1.5).is_err());
    }
}
