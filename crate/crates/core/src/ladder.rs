//! Epsilon-ladders: validation, a greedy builder and an exact longest-ladder
//! search for small instances.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graph::{distances_from, VertexSet, WeightedGraph};

/// Pairs `(x_i, p_i)` of centers and points with parameters `epsilon` and
/// width `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsLadder {
    pub pairs: Vec<(usize, usize)>,
    pub epsilon: f64,
    pub r: f64,
}

impl EpsLadder {
    pub fn new(pairs: Vec<(usize, usize)>, epsilon: f64, r: f64) -> Self {
        EpsLadder { pairs, epsilon, r }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Extra requirements on top of the ladder definition.
#[derive(Debug, Clone, Copy, Default)]
pub struct LadderChecks<'a> {
    /// Every `dist(x_j, p_i) >= r`.
    pub lb_extra: bool,
    /// Every pair must be an edge of this matching.
    pub matching: Option<&'a [(usize, usize)]>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LadderViolation {
    OutOfRange { i: usize },
    /// `dist(p_i, x_i) <= (1+eps) r`.
    OwnPairTooClose { i: usize, distance: f64 },
    /// `dist(p_j, x_i) > r` for some `j < i`.
    EarlierPointTooFar { j: usize, i: usize, distance: f64 },
    /// `dist(x_j, p_i) < r`.
    CrossTooClose { j: usize, i: usize, distance: f64 },
    NotMatched { i: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderReport {
    pub valid: bool,
    pub length: usize,
    pub first_violation: Option<LadderViolation>,
}

/// Checks pair `i = 1, 2, ...` in turn (own pair, then earlier points, then
/// the optional extras) and stops at the first failure. Indices in the
/// report are 1-based.
pub fn validate_ladder(g: &WeightedGraph, ladder: &EpsLadder, checks: &LadderChecks<'_>) -> LadderReport {
    let n = g.vertex_count();
    let fail = |v: LadderViolation| LadderReport {
        valid: false,
        length: ladder.len(),
        first_violation: Some(v),
    };
    for (i, &(x, p)) in ladder.pairs.iter().enumerate() {
        if x >= n || p >= n {
            return fail(LadderViolation::OutOfRange { i: i + 1 });
        }
    }
    let tol = checks.tolerance;
    let r = ladder.r;
    let far = (1.0 + ladder.epsilon) * r;
    let from_point: Vec<Vec<f64>> = ladder
        .pairs
        .iter()
        .map(|&(_, p)| distances_from(g, [p], None, f64::INFINITY))
        .collect();
    let matched: Option<std::collections::HashSet<(usize, usize)>> = checks
        .matching
        .map(|m| m.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect());
    for (i, &(x, p)) in ladder.pairs.iter().enumerate() {
        let own = from_point[i][x];
        if own <= far - tol {
            return fail(LadderViolation::OwnPairTooClose { i: i + 1, distance: own });
        }
        for j in 0..i {
            let d = from_point[j][x];
            if d > r + tol {
                return fail(LadderViolation::EarlierPointTooFar {
                    j: j + 1,
                    i: i + 1,
                    distance: d,
                });
            }
        }
        if checks.lb_extra {
            for (j, &(xj, _)) in ladder.pairs.iter().enumerate() {
                let d = from_point[i][xj];
                if d < r - tol {
                    return fail(LadderViolation::CrossTooClose {
                        j: j + 1,
                        i: i + 1,
                        distance: d,
                    });
                }
            }
        }
        if let Some(m) = &matched {
            if !m.contains(&(x.min(p), x.max(p))) {
                return fail(LadderViolation::NotMatched { i: i + 1 });
            }
        }
    }
    LadderReport {
        valid: true,
        length: ladder.len(),
        first_violation: None,
    }
}

fn check_params(epsilon: f64, r: f64) -> Result<()> {
    if !(epsilon > 0.0) || !(r > 0.0) || !r.is_finite() {
        return invalid(format!("need epsilon > 0 and finite r > 0, got {epsilon}, {r}"));
    }
    Ok(())
}

/// Distances from every point, indexed by position in `points`.
fn point_distances(g: &WeightedGraph, points: &VertexSet) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| distances_from(g, [p], None, f64::INFINITY))
        .collect()
}

/// Appends the first extendable `(x, p)` in (center id, point id) order
/// until none is left.
pub fn greedy_ladder(
    g: &WeightedGraph,
    centers: &VertexSet,
    points: &VertexSet,
    epsilon: f64,
    r: f64,
) -> Result<EpsLadder> {
    check_params(epsilon, r)?;
    g.check_set(centers)?;
    g.check_set(points)?;
    let far = (1.0 + epsilon) * r;
    let dist = point_distances(g, points);
    let pts = points.as_slice();
    let mut eligible: Vec<usize> = centers.as_slice().to_vec();
    let mut pairs = Vec::new();
    'grow: loop {
        for &x in &eligible {
            if let Some(pi) = (0..pts.len()).find(|&pi| dist[pi][x] > far) {
                pairs.push((x, pts[pi]));
                eligible.retain(|&c| dist[pi][c] <= r);
                continue 'grow;
            }
        }
        break;
    }
    Ok(EpsLadder::new(pairs, epsilon, r))
}

/// Largest instance the exact search accepts per role.
pub const BRUTE_FORCE_MAX: usize = 10;

/// Exact longest ladder by depth-first search. The only state that matters
/// for extending a prefix is the set of centers within `r` of every point
/// used so far, so results are memoised on that set.
pub fn brute_force_longest_ladder(
    g: &WeightedGraph,
    centers: &VertexSet,
    points: &VertexSet,
    epsilon: f64,
    r: f64,
    limit_n: usize,
) -> Result<(usize, EpsLadder)> {
    check_params(epsilon, r)?;
    g.check_set(centers)?;
    g.check_set(points)?;
    if limit_n > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge(format!(
            "limit_n = {limit_n} exceeds {BRUTE_FORCE_MAX}"
        )));
    }
    if centers.len() > limit_n || points.len() > limit_n {
        return Err(Error::TooLarge(format!(
            "{} centers and {} points exceed limit {limit_n}",
            centers.len(),
            points.len()
        )));
    }
    let far = (1.0 + epsilon) * r;
    let dist = point_distances(g, points);
    let cs = centers.as_slice();
    let nc = cs.len();
    // near[pi]: centers within r of point pi; ok[ci]: points far from center ci.
    let near: Vec<u32> = (0..points.len())
        .map(|pi| (0..nc).filter(|&ci| dist[pi][cs[ci]] <= r).fold(0, |m, ci| m | 1 << ci))
        .collect();
    let ok: Vec<Vec<usize>> = (0..nc)
        .map(|ci| (0..points.len()).filter(|&pi| dist[pi][cs[ci]] > far).collect())
        .collect();

    fn best(
        mask: u32,
        near: &[u32],
        ok: &[Vec<usize>],
        memo: &mut HashMap<u32, (usize, Option<(usize, usize)>)>,
    ) -> usize {
        if let Some(&(len, _)) = memo.get(&mask) {
            return len;
        }
        let mut top = (0, None);
        for (ci, pis) in ok.iter().enumerate() {
            if mask & (1 << ci) == 0 {
                continue;
            }
            for &pi in pis {
                let len = 1 + best(mask & near[pi], near, ok, memo);
                if len > top.0 {
                    top = (len, Some((ci, pi)));
                }
            }
        }
        memo.insert(mask, top);
        top.0
    }

    let mut memo = HashMap::new();
    let full = if nc == 0 { 0 } else { u32::MAX >> (32 - nc) };
    let length = best(full, &near, &ok, &mut memo);
    let mut pairs = Vec::new();
    let mut mask = full;
    while let Some(&(_, Some((ci, pi)))) = memo.get(&mask) {
        pairs.push((cs[ci], points.as_slice()[pi]));
        mask &= near[pi];
    }
    debug_assert_eq!(pairs.len(), length);
    Ok((length, EpsLadder::new(pairs, epsilon, r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// x1 = 0, p1 = 1, x2 = 2, p2 = 3.
    fn two_pairs(cross: f64) -> WeightedGraph {
        WeightedGraph::from_edges(4, [(0, 1, 1.2), (2, 3, 1.2), (1, 2, cross)]).unwrap()
    }

    #[test]
    fn two_pair_example() {
        let g = two_pairs(1.0);
        let l = EpsLadder::new(vec![(0, 1), (2, 3)], 0.1, 1.0);
        let rep = validate_ladder(&g, &l, &LadderChecks::default());
        assert!(rep.valid);
        assert_eq!(rep.length, 2);

        let bad = validate_ladder(&two_pairs(1.05), &l, &LadderChecks::default());
        assert_eq!(
            bad.first_violation,
            Some(LadderViolation::EarlierPointTooFar {
                j: 1,
                i: 2,
                distance: 1.05
            })
        );

        let reversed = EpsLadder::new(vec![(2, 3), (0, 1)], 0.1, 1.0);
        assert!(!validate_ladder(&g, &reversed, &LadderChecks::default()).valid);

        let all: VertexSet = (0..4).collect();
        let (len, wit) = brute_force_longest_ladder(&g, &VertexSet::new(vec![0, 2]), &VertexSet::new(vec![1, 3]), 0.1, 1.0, 10).unwrap();
        assert_eq!(len, 2);
        assert_eq!(wit.pairs, vec![(0, 1), (2, 3)]);
        assert!(brute_force_longest_ladder(&g, &all, &all, 0.1, 1.0, 11).is_err());
    }

    #[test]
    fn matching_and_extra_checks() {
        let g = two_pairs(1.0);
        let l = EpsLadder::new(vec![(0, 1), (2, 3)], 0.1, 1.0);
        let m = [(0, 1), (2, 3)];
        let checks = LadderChecks {
            lb_extra: true,
            matching: Some(&m),
            tolerance: 0.0,
        };
        assert!(validate_ladder(&g, &l, &checks).valid);
        let m2 = [(0, 1)];
        let checks = LadderChecks {
            matching: Some(&m2),
            ..checks
        };
        assert_eq!(
            validate_ladder(&g, &l, &checks).first_violation,
            Some(LadderViolation::NotMatched { i: 2 })
        );
    }

    #[test]
    fn greedy_examples() {
        let star = WeightedGraph::from_edges(5, (1..5).map(|l| (0, l, 1.0))).unwrap();
        let leaves: VertexSet = (1..5).collect();
        let l = greedy_ladder(&star, &leaves, &leaves, 0.5, 1.0).unwrap();
        // p1 = l2 is itself a center within distance 0, so (l2, l1) follows
        assert_eq!(l.pairs, vec![(1, 2), (2, 1)]);
        assert!(validate_ladder(&star, &l, &LadderChecks::default()).valid);

        let two = WeightedGraph::from_edges(2, [(0, 1, 2.0)]).unwrap();
        let both = VertexSet::all(2);
        // same effect: (v0, v1) then (v1, v0)
        assert_eq!(greedy_ladder(&two, &both, &both, 0.5, 1.0).unwrap().pairs, vec![(0, 1), (1, 0)]);
        assert_eq!(brute_force_longest_ladder(&two, &both, &both, 0.5, 1.0, 10).unwrap().0, 2);
        let one = VertexSet::singleton(0);
        assert_eq!(greedy_ladder(&two, &one, &VertexSet::singleton(1), 0.5, 1.0).unwrap().len(), 1);
    }

    #[test]
    fn single_far_pair() {
        let g = WeightedGraph::from_edges(2, [(0, 1, 3.0)]).unwrap();
        let (len, _) = brute_force_longest_ladder(&g, &VertexSet::singleton(0), &VertexSet::singleton(1), 0.5, 1.0, 10).unwrap();
        assert_eq!(len, 1);
    }

    /// Every sequence of distinct pairs, checked from scratch with the
    /// validator; no memo, no pruning beyond validity of the prefix.
    fn enumerate_longest(g: &WeightedGraph, centers: &VertexSet, points: &VertexSet, eps: f64, r: f64) -> usize {
        fn go(g: &WeightedGraph, cand: &[(usize, usize)], cur: &mut Vec<(usize, usize)>, eps: f64, r: f64) -> usize {
            let mut best = cur.len();
            for &pair in cand {
                if cur.contains(&pair) {
                    continue;
                }
                cur.push(pair);
                if validate_ladder(g, &EpsLadder::new(cur.clone(), eps, r), &LadderChecks::default()).valid {
                    best = best.max(go(g, cand, cur, eps, r));
                }
                cur.pop();
            }
            best
        }
        let cand: Vec<(usize, usize)> = centers.iter().flat_map(|x| points.iter().map(move |p| (x, p))).collect();
        go(g, &cand, &mut Vec::new(), eps, r)
    }

    #[test]
    fn unit_five_cycle_matches_enumeration() {
        let g = WeightedGraph::from_edges(5, (0..5).map(|i| (i, (i + 1) % 5, 1.0))).unwrap();
        let all = VertexSet::all(5);
        let (len, wit) = brute_force_longest_ladder(&g, &all, &all, 0.3, 1.0, 10).unwrap();
        assert_eq!(len, enumerate_longest(&g, &all, &all, 0.3, 1.0));
        assert!(validate_ladder(&g, &wit, &LadderChecks::default()).valid);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn brute_force_is_exact_and_dominates_greedy(
            n in 2usize..6,
            raw in proptest::collection::vec((0usize..6, 0usize..6, 1u32..8), 1..10),
            eps in prop_oneof![Just(0.1), Just(0.3)],
        ) {
            let mut g = WeightedGraph::new(n);
            for (u, v, w) in raw {
                let (u, v) = (u % n, v % n);
                if u != v && !g.has_edge(u, v) {
                    g.add_edge(u, v, w as f64 / 4.0).unwrap();
                }
            }
            let all = VertexSet::all(n);
            let (len, wit) = brute_force_longest_ladder(&g, &all, &all, eps, 1.0, 10).unwrap();
            prop_assert_eq!(len, enumerate_longest(&g, &all, &all, eps, 1.0));
            prop_assert!(validate_ladder(&g, &wit, &LadderChecks::default()).valid);
            let greedy = greedy_ladder(&g, &all, &all, eps, 1.0).unwrap();
            prop_assert!(validate_ladder(&g, &greedy, &LadderChecks::default()).valid);
            prop_assert!(greedy.len() <= len);
        }
    }
}
