use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::graph::{distances_from, WeightedGraph};
use crate::partition::OrderedPartition;

/// Weakly `r`-reachable parts of every part of an ordered partition.
///
/// `reach[x]` lists, in increasing order, the parts `y ⪯ x` that can be
/// reached from `x` by a path of length at most `r` using only vertices of
/// parts `⪰ y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WReachTable {
    pub r: f64,
    reach: Vec<Vec<usize>>,
    pub wcol: usize,
}

impl WReachTable {
    pub fn reach(&self, x: usize) -> &[usize] {
        &self.reach[x]
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.reach[x].binary_search(&y).is_ok()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.reach.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.reach.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reach.is_empty()
    }

    /// Whether the reach sets of `a` and `b` share a part.
    pub fn intersects(&self, a: usize, b: usize) -> bool {
        let (mut i, mut j) = (0, 0);
        let (ra, rb) = (&self.reach[a], &self.reach[b]);
        while i < ra.len() && j < rb.len() {
            match ra[i].cmp(&rb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }
}

/// Computes `WReach_r` for every part, iterating the target part `y` in
/// increasing order and searching from `y` inside the union of parts `⪰ y`.
pub fn weak_reach_table(g: &WeightedGraph, p: &OrderedPartition, r: f64) -> Result<WReachTable> {
    if !(r > 0.0) {
        return invalid(format!("radius must be positive, got {r}"));
    }
    p.check_graph(g)?;
    Ok(weak_reach_excluding(g, p, r, &vec![false; p.len()]))
}

/// Weak reachability in `G - ∪{excluded parts}` for the partition restricted
/// to the remaining parts. Excluded parts get empty reach sets.
pub(crate) fn weak_reach_excluding(
    g: &WeightedGraph,
    p: &OrderedPartition,
    r: f64,
    excluded: &[bool],
) -> WReachTable {
    let n = g.vertex_count();
    let reached_by: Vec<Vec<usize>> = (0..p.len())
        .into_par_iter()
        .map(|y| {
            if excluded[y] {
                return Vec::new();
            }
            let mask: Vec<bool> = (0..n)
                .map(|v| {
                    let q = p.part_of(v);
                    q >= y && !excluded[q]
                })
                .collect();
            let d = distances_from(g, p.part(y).iter(), Some(&mask), r);
            let mut xs: Vec<usize> = (0..n)
                .filter(|&v| d[v] <= r)
                .map(|v| p.part_of(v))
                .collect();
            xs.sort_unstable();
            xs.dedup();
            xs
        })
        .collect();
    let mut reach = vec![Vec::new(); p.len()];
    for (y, xs) in reached_by.iter().enumerate() {
        for &x in xs {
            reach[x].push(y);
        }
    }
    let wcol = reach.iter().map(Vec::len).max().unwrap_or(0);
    WReachTable { r, reach, wcol }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexSet;

    /// Exhaustive simple-path enumeration straight from the definition.
    fn brute_reach(g: &WeightedGraph, p: &OrderedPartition, r: f64) -> Vec<Vec<usize>> {
        fn dfs(
            g: &WeightedGraph,
            p: &OrderedPartition,
            u: usize,
            len: f64,
            r: f64,
            min_part: usize,
            seen: &mut Vec<bool>,
            out: &mut Vec<bool>,
        ) {
            // every part on the path is >= the smallest part visited, so the
            // smallest part is weakly reachable
            out[min_part] = true;
            for &(w, wt) in g.neighbors(u) {
                if seen[w] || !wt.is_finite() || len + wt > r {
                    continue;
                }
                seen[w] = true;
                dfs(g, p, w, len + wt, r, min_part.min(p.part_of(w)), seen, out);
                seen[w] = false;
            }
        }
        (0..p.len())
            .map(|x| {
                let mut out = vec![false; p.len()];
                for s in p.part(x).iter() {
                    let mut seen = vec![false; g.vertex_count()];
                    seen[s] = true;
                    dfs(g, p, s, 0.0, r, p.part_of(s), &mut seen, &mut out);
                }
                (0..p.len()).filter(|&y| out[y] && y <= x).collect()
            })
            .collect()
    }

    fn unit_path3() -> WeightedGraph {
        WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn unit_path_radius_one() {
        let g = unit_path3();
        let p = OrderedPartition::singletons(&[0, 1, 2]).unwrap();
        let t = weak_reach_table(&g, &p, 1.0).unwrap();
        assert_eq!(t.reach(0), &[0]);
        assert_eq!(t.reach(1), &[0, 1]);
        assert_eq!(t.reach(2), &[1, 2]);
        assert_eq!(t.wcol, 2);
        assert_eq!(brute_reach(&g, &p, 1.0), vec![vec![0], vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn unit_path_radius_two() {
        let g = unit_path3();
        let p = OrderedPartition::singletons(&[0, 1, 2]).unwrap();
        let t = weak_reach_table(&g, &p, 2.0).unwrap();
        assert_eq!(t.reach(2), &[0, 1, 2]);
        assert_eq!(t.wcol, 3);
    }

    #[test]
    fn small_radius_gives_wcol_one() {
        let g = WeightedGraph::from_edges(4, [(0, 1, 2.0), (1, 2, 3.0), (2, 3, 2.5)]).unwrap();
        let p = OrderedPartition::singletons(&[3, 1, 0, 2]).unwrap();
        let t = weak_reach_table(&g, &p, 1.5).unwrap();
        assert_eq!(t.wcol, 1);
        assert!(weak_reach_table(&g, &p, 0.0).is_err());
    }

    #[test]
    fn blocked_by_smaller_parts() {
        // 0 - 1 - 2 with the middle vertex first: 2 cannot reach 0 through 1
        let g = unit_path3();
        let p = OrderedPartition::new(
            3,
            vec![VertexSet::singleton(1), VertexSet::singleton(0), VertexSet::singleton(2)],
        )
        .unwrap();
        let t = weak_reach_table(&g, &p, 5.0).unwrap();
        assert_eq!(t.reach(2), &[0, 2]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn instance() -> impl Strategy<Value = (WeightedGraph, OrderedPartition)> {
            (2usize..8)
                .prop_flat_map(|n| {
                    (
                        Just(n),
                        proptest::collection::vec((0..n, 0..n, 1u32..5), 0..14),
                        Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
                        proptest::collection::vec(0usize..3, n),
                    )
                })
                .prop_map(|(n, edges, order, cuts)| {
                    let mut g = WeightedGraph::new(n);
                    for (u, v, w) in edges {
                        let _ = g.add_edge(u, v, w as f64);
                    }
                    // group consecutive vertices of the shuffled order
                    let mut parts: Vec<Vec<usize>> = vec![];
                    for (i, &v) in order.iter().enumerate() {
                        if i == 0 || cuts[i] == 0 {
                            parts.push(vec![v]);
                        } else {
                            parts.last_mut().unwrap().push(v);
                        }
                    }
                    let p = OrderedPartition::new(n, parts.into_iter().map(VertexSet::new).collect())
                        .unwrap();
                    (g, p)
                })
        }

        proptest! {
            #[test]
            fn matches_path_enumeration((g, p) in instance(), r in 1u32..9) {
                let t = weak_reach_table(&g, &p, r as f64).unwrap();
                let brute = brute_reach(&g, &p, r as f64);
                for x in 0..p.len() {
                    prop_assert_eq!(t.reach(x), &brute[x][..]);
                    prop_assert!(t.contains(x, x));
                }
            }

            #[test]
            fn monotone_in_radius((g, p) in instance(), r1 in 1u32..6, extra in 0u32..6) {
                let a = weak_reach_table(&g, &p, r1 as f64).unwrap();
                let b = weak_reach_table(&g, &p, (r1 + extra) as f64).unwrap();
                prop_assert!(a.wcol <= b.wcol);
            }
        }
    }
}
