//! Flatness extraction: delete a few hub parts so that a large subfamily
//! of a given family of parts becomes pairwise far apart.

use num_bigint::BigUint;
use serde::Serialize;

use crate::decomposition::{heuristic_cop_decomposition, BufferedCopDecomposition};
use crate::error::{invalid, Error, Result};
use crate::graph::{distances_from, is_scattered, VertexSet, WeightedGraph};
use crate::partition::OrderedPartition;
use crate::wcol::{partition_from_cop_decomposition, weak_reach_excluding, weak_reach_table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Guarantees {
    /// The size precondition held, so `|B| >= m` is promised.
    Proven,
    /// Only the unconditional properties are promised.
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessResult {
    /// Part indices deleted as hubs, in insertion order.
    pub s: Vec<usize>,
    /// Part indices of the scattered witnesses, in selection order.
    pub b: Vec<usize>,
    /// `wcol_r` of the input ordering.
    pub c: usize,
    pub first_loop_iterations: usize,
    pub guarantees: Guarantees,
}

/// Runs the two greedy loops. The first loop picks the lowest-index part
/// reached from at least `|A| / (2mc)` members of `A` (compared by integer
/// cross-multiplication); `m = 0` never fires it.
pub fn flatness(
    g: &WeightedGraph,
    r: f64,
    p: &OrderedPartition,
    m: usize,
    a: &[usize],
) -> Result<FlatnessResult> {
    if !(r > 0.0) {
        return invalid(format!("r must be positive, got {r}"));
    }
    p.check_graph(g)?;
    if let Some(&x) = a.iter().find(|&&x| x >= p.len()) {
        return invalid(format!("part index {x} out of range"));
    }
    let mut a: Vec<usize> = a.to_vec();
    a.sort_unstable();
    a.dedup();

    let full = weak_reach_table(g, p, r)?;
    let c = full.wcol;
    let need = (BigUint::from(2 * m * c)).pow(c as u32 + 1);
    let guarantees = if BigUint::from(a.len()) >= need && m > 0 {
        Guarantees::Proven
    } else {
        Guarantees::Empirical
    };
    if a.is_empty() {
        return Ok(FlatnessResult {
            s: Vec::new(),
            b: Vec::new(),
            c,
            first_loop_iterations: 0,
            guarantees,
        });
    }

    let mut excluded = vec![false; p.len()];
    let mut s = Vec::new();
    let mut table = weak_reach_excluding(g, p, r, &excluded);
    loop {
        if m == 0 {
            break;
        }
        let mut reached_by = vec![0usize; p.len()];
        for &y in &a {
            for &x in table.reach(y) {
                reached_by[x] += 1;
            }
        }
        let denom = 2 * m * c;
        let Some(x) = (0..p.len()).find(|&x| !excluded[x] && reached_by[x] * denom >= a.len())
        else {
            break;
        };
        a.retain(|&y| table.contains(y, x));
        s.push(x);
        excluded[x] = true;
        if a.is_empty() || s.iter().any(|&z| a.iter().any(|&y| !full.contains(y, z))) {
            return Err(Error::Unreachable("hub invariant broken".into()));
        }
        if s.len() > c {
            return Err(Error::Unreachable(format!("{} hubs exceed c = {c}", s.len())));
        }
        table = weak_reach_excluding(g, p, r, &excluded);
    }

    let mut rest: Vec<usize> = a.iter().copied().filter(|&y| !excluded[y]).collect();
    let mut b = Vec::new();
    while let Some(&x) = rest.first() {
        b.push(x);
        rest.retain(|&y| !table.intersects(x, y));
    }
    Ok(FlatnessResult {
        first_loop_iterations: s.len(),
        s,
        b,
        c,
        guarantees,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessCheck {
    pub s_within_c: bool,
    pub reach_disjoint: bool,
    /// Pairwise distance `> r` in `G - ∪S`, from direct searches.
    pub pairwise_far: bool,
    pub b_disjoint_from_s: bool,
    pub b_size_ok: bool,
}

impl FlatnessCheck {
    pub fn all(&self) -> bool {
        self.s_within_c && self.reach_disjoint && self.pairwise_far && self.b_disjoint_from_s && self.b_size_ok
    }
}

/// Re-derives the post-conditions of [`flatness`] from scratch.
pub fn verify_flatness(
    g: &WeightedGraph,
    r: f64,
    p: &OrderedPartition,
    m: usize,
    res: &FlatnessResult,
) -> FlatnessCheck {
    let n = g.vertex_count();
    let mut excluded = vec![false; p.len()];
    for &x in &res.s {
        excluded[x] = true;
    }
    let table = weak_reach_excluding(g, p, r, &excluded);
    let mut reach_disjoint = true;
    for (i, &x) in res.b.iter().enumerate() {
        for &y in &res.b[i + 1..] {
            if table.intersects(x, y) {
                reach_disjoint = false;
            }
        }
    }
    let alive: Vec<bool> = (0..n).map(|v| !excluded[p.part_of(v)]).collect();
    let pairwise_far = res.b.iter().all(|&x| {
        let d = distances_from(g, p.part(x).iter(), Some(&alive), r);
        res.b
            .iter()
            .all(|&y| y == x || p.part(y).iter().all(|v| d[v] > r))
    });
    FlatnessCheck {
        s_within_c: res.s.len() <= res.c,
        reach_disjoint,
        pairwise_far,
        b_disjoint_from_s: res.b.iter().all(|&x| !excluded[x]),
        b_size_ok: res.guarantees == Guarantees::Empirical || res.b.len() >= m,
    }
}

/// Where the cop decomposition for [`flat_scattered`] comes from.
pub enum DecompositionInput<'a> {
    Given(&'a BufferedCopDecomposition),
    /// Build one with the peeling heuristic at `rho / 4` and this `h`.
    Heuristic(usize),
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatScattered {
    /// Deleted parts as vertex sets.
    pub s: Vec<VertexSet>,
    pub b: VertexSet,
    pub partition: OrderedPartition,
    pub flatness: FlatnessResult,
    /// Every part of the partition lay within `rho/4` of its skeleton.
    pub radius_ok: bool,
}

/// Partition from a cop decomposition followed by [`flatness`] on the
/// parts holding `A`; `A` must be `rho`-scattered and `r > rho`.
pub fn flat_scattered(
    g: &WeightedGraph,
    input: DecompositionInput<'_>,
    r: f64,
    rho: f64,
    m: usize,
    a: &VertexSet,
) -> Result<FlatScattered> {
    if !(rho > 0.0) || !(r > rho) {
        return invalid(format!("need 0 < rho < r, got rho = {rho}, r = {r}"));
    }
    g.check_set(a)?;
    if !is_scattered(g, a, rho, None)? {
        return invalid(format!("A is not {rho}-scattered"));
    }
    let built;
    let bcd = match input {
        DecompositionInput::Given(b) => b,
        DecompositionInput::Heuristic(h) => {
            built = heuristic_cop_decomposition(g, rho / 4.0, h)?.0;
            &built
        }
    };
    let cp = partition_from_cop_decomposition(g, bcd, rho)?;
    let p = cp.partition;
    let mut a_parts: Vec<usize> = a.iter().map(|v| p.part_of(v)).collect();
    a_parts.sort_unstable();
    a_parts.dedup();
    let res = flatness(g, r, &p, m, &a_parts)?;
    let b = res
        .b
        .iter()
        .filter_map(|&x| a.iter().find(|&v| p.part_of(v) == x))
        .collect();
    Ok(FlatScattered {
        s: res.s.iter().map(|&x| p.part(x).clone()).collect(),
        b,
        partition: p,
        flatness: res,
        radius_ok: cp.radius_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{set_diameter, DiameterMode};

    fn star(leaves: usize) -> WeightedGraph {
        WeightedGraph::from_edges(leaves + 1, (1..=leaves).map(|l| (0, l, 1.0))).unwrap()
    }

    #[test]
    fn isolated_singletons() {
        let g = WeightedGraph::new(3);
        let p = OrderedPartition::singletons(&[0, 1, 2]).unwrap();
        let res = flatness(&g, 1.0, &p, 2, &[0, 1, 2]).unwrap();
        // threshold 3/4: the first part is reached from itself once
        assert_eq!(res.s, vec![0]);
        assert!(res.b.is_empty());
        assert_eq!(res.c, 1);
        assert!(verify_flatness(&g, 1.0, &p, 2, &res).all());
    }

    #[test]
    fn star_center_is_the_hub() {
        let g = star(16);
        let order: Vec<usize> = (0..17).collect();
        let p = OrderedPartition::singletons(&order).unwrap();
        let a: Vec<usize> = (1..17).collect();
        let res = flatness(&g, 2.0, &p, 2, &a).unwrap();
        assert_eq!(res.s, vec![0]);
        assert_eq!(res.b, a);
        assert_eq!(res.c, 2);
        let chk = verify_flatness(&g, 2.0, &p, 2, &res);
        assert!(chk.all(), "{chk:?}");
        let alive: VertexSet = (1..17).collect();
        assert!(is_scattered(&g, &alive, 2.0, Some(&alive)).unwrap());
    }

    #[test]
    fn empty_a_and_zero_m() {
        let g = star(3);
        let p = OrderedPartition::singletons(&[0, 1, 2, 3]).unwrap();
        let res = flatness(&g, 1.0, &p, 2, &[]).unwrap();
        assert!(res.s.is_empty() && res.b.is_empty());
        let res = flatness(&g, 1.0, &p, 0, &[1, 2, 3]).unwrap();
        assert!(res.s.is_empty());
        assert_eq!(res.b, vec![1]);
    }

    #[test]
    fn flat_scattered_on_a_star() {
        let g = star(16);
        let a: VertexSet = (1..17).collect();
        let out = flat_scattered(&g, DecompositionInput::Heuristic(2), 2.0, 1.0, 2, &a).unwrap();
        assert!(out.b.len() >= 2);
        assert!(out.b.is_subset(&a));
        let removed: Vec<bool> = {
            let mut m = vec![false; 17];
            for s in &out.s {
                for v in s.iter() {
                    m[v] = true;
                }
            }
            m
        };
        let alive: VertexSet = (0..17).filter(|&v| !removed[v]).collect();
        assert!(out.b.is_subset(&alive));
        assert!(is_scattered(&g, &out.b, 2.0, Some(&alive)).unwrap());
        for s in &out.s {
            assert!(set_diameter(&g, s, DiameterMode::Strong).unwrap() <= 1.0);
        }
    }

    #[test]
    fn flat_scattered_single_vertex_and_bad_input() {
        let g = star(4);
        let a = VertexSet::singleton(2);
        let out = flat_scattered(&g, DecompositionInput::Heuristic(2), 2.0, 1.0, 1, &a).unwrap();
        // |A| = 1 is below (2mc)^(c+1): the hub loop may swallow A's own part
        assert_eq!(out.flatness.guarantees, Guarantees::Empirical);
        assert!(out.b.is_subset(&a));
        assert!(out.flatness.s.len() <= out.flatness.c);
        let close = VertexSet::new(vec![0, 1]);
        assert!(flat_scattered(&g, DecompositionInput::Heuristic(2), 2.0, 1.0, 1, &close).is_err());
        assert!(flat_scattered(&g, DecompositionInput::Heuristic(2), 1.0, 1.0, 1, &a).is_err());
    }
}
