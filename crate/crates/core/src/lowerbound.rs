//! The recursive family `G(k, r, d)` with its twin-leaf matching, exact
//! rational edge weights carrying a long width-1 ladder, and a tree
//! decomposition of width at most `2k`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::bounds::binomial;
use crate::decomposition::{validate_tree_decomposition, TreeDecomposition};
use crate::error::{invalid, Error, Result};
use crate::graph::{VertexSet, WeightedGraph};
use crate::ladder::EpsLadder;

/// Refuse to build instances with more vertices than this.
pub const MAX_LB_VERTICES: u128 = 2_000_000;

/// `2^C(k+r-2, r-1)`.
pub fn lb_ladder_length(k: u64, r: u64) -> Result<BigUint> {
    if k < 1 || r < 1 {
        return invalid("k and r must be at least 1");
    }
    let e = binomial(k + r - 2, r - 1)
        .to_u64()
        .filter(|&e| e <= 1 << 24)
        .ok_or_else(|| Error::TooLarge("ladder length exponent too large".into()))?;
    Ok(BigUint::one() << e)
}

/// `(vertices, matching edges)` of `G(k, r, d)` without building it.
pub fn lb_size(k: u64, r: u64, d: u64) -> (u128, u128) {
    fn go(k: u64, r: u64, d: u128, memo: &mut HashMap<(u64, u64), (u128, u128)>) -> (u128, u128) {
        if let Some(&v) = memo.get(&(k, r)) {
            return v;
        }
        let out = if k == 1 || r == 1 {
            let levels = if k == 1 { r } else { k } as u32;
            let leaves = d.saturating_pow(levels);
            let tree = (0..=levels).fold(0u128, |acc, i| acc.saturating_add(d.saturating_pow(i)));
            (tree.saturating_add(leaves), leaves)
        } else {
            let (ni, mi) = go(k, r - 1, d, memo);
            let (nc, mc) = go(k - 1, r, d, memo);
            let copies = mi.saturating_mul(d);
            (ni.saturating_add(copies.saturating_mul(nc)), copies.saturating_mul(mc))
        };
        memo.insert((k, r), out);
        out
    }
    go(k, r, d as u128, &mut HashMap::new())
}

/// Weight `None` stands for an infinite-weight edge.
type Weight = Option<BigRational>;

#[derive(Debug, Clone)]
struct Piece {
    n: usize,
    edges: Vec<(usize, usize, Weight)>,
    matching: Vec<(usize, usize)>,
    ladder: Vec<(usize, usize)>,
    bags: Vec<Vec<usize>>,
    tree: Vec<(usize, usize)>,
}

impl Piece {
    fn append(&mut self, other: &Piece, weighted: bool) -> usize {
        let off = self.n;
        self.n += other.n;
        self.edges.extend(other.edges.iter().map(|(u, v, w)| {
            (u + off, v + off, if weighted { w.clone() } else { None })
        }));
        self.matching.extend(other.matching.iter().map(|&(a, b)| (a + off, b + off)));
        off
    }
}

/// Complete `d`-ary tree with `levels` edges from root to leaf (children of
/// `i` are `d*i+1 ..= d*i+d`), optionally closed under ancestry, plus one
/// twin per leaf.
fn base_structure(levels: u32, closure: bool, d: usize) -> (Piece, Vec<usize>, Vec<Option<usize>>) {
    let tree_n: usize = (0..=levels).map(|i| d.pow(i)).sum();
    let first_leaf = tree_n - d.pow(levels);
    let parent: Vec<Option<usize>> = (0..tree_n).map(|v| (v > 0).then(|| (v - 1) / d)).collect();
    let ancestors = |v: usize| {
        let mut out = Vec::new();
        let mut cur = parent[v];
        while let Some(p) = cur {
            out.push(p);
            cur = parent[p];
        }
        out.reverse();
        out
    };
    let mut edges = Vec::new();
    for v in 1..tree_n {
        if closure {
            for a in ancestors(v) {
                edges.push((a, v, None));
            }
        } else {
            edges.push((parent[v].unwrap(), v, None));
        }
    }
    let mut matching = Vec::new();
    let mut twin_of = Vec::new();
    for (i, leaf) in (first_leaf..tree_n).enumerate() {
        let twin = tree_n + i;
        twin_of.push(twin);
        edges.push((leaf, twin, None));
        let nbrs = if closure { ancestors(leaf) } else { vec![parent[leaf].unwrap()] };
        for a in nbrs {
            edges.push((a, twin, None));
        }
        matching.push((leaf, twin));
    }
    // Decomposition: one bag per tree node for plain trees, a path over
    // root-to-leaf chains when closed under ancestry.
    let (bags, tree) = if closure && levels > 1 {
        let bags: Vec<Vec<usize>> = (first_leaf..tree_n)
            .map(|leaf| {
                let mut b = ancestors(leaf);
                b.push(leaf);
                b.push(twin_of[leaf - first_leaf]);
                b
            })
            .collect();
        let tree = (1..bags.len()).map(|i| (i - 1, i)).collect();
        (bags, tree)
    } else {
        let bags = (0..tree_n)
            .map(|v| {
                let mut b: Vec<usize> = parent[v].into_iter().chain([v]).collect();
                if v >= first_leaf {
                    b.push(twin_of[v - first_leaf]);
                }
                b
            })
            .collect();
        let tree = (1..tree_n).map(|v| (parent[v].unwrap(), v)).collect();
        (bags, tree)
    };
    let piece = Piece {
        n: tree_n + twin_of.len(),
        edges,
        matching,
        ladder: Vec::new(),
        bags,
        tree,
    };
    (piece, twin_of, parent)
}

struct Builder {
    d: usize,
    structures: HashMap<(u64, u64), Piece>,
    weighted: HashMap<(u64, u64, BigRational), Piece>,
    levels: Vec<LevelParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelParams {
    pub k: u64,
    pub r: u64,
    pub epsilon: String,
    pub gamma: String,
    pub epsilon_prime: String,
}

impl Builder {
    fn structure(&mut self, k: u64, r: u64) -> Piece {
        if let Some(p) = self.structures.get(&(k, r)) {
            return p.clone();
        }
        let piece = if k == 1 || r == 1 {
            let levels = if k == 1 { r } else { k } as u32;
            base_structure(levels, k != 1, self.d).0
        } else {
            let inner = self.structure(k, r - 1);
            let copy = self.structure(k - 1, r);
            self.attach(inner, |_, _| (copy.clone(), None))
        };
        self.structures.insert((k, r), piece.clone());
        piece
    }

    /// Glues `d` copies onto every matching edge of `inner`. `pick(i, j)`
    /// returns the piece for copy `j` of matching edge `i` and, for the
    /// single weighted copy, the connector weight plus the edge's ladder
    /// orientation `(x, p)`.
    fn attach(
        &self,
        inner: Piece,
        mut pick: impl FnMut(usize, usize) -> (Piece, Option<(BigRational, usize, usize)>),
    ) -> Piece {
        let mut out = Piece {
            n: inner.n,
            edges: inner.edges.clone(),
            matching: Vec::new(),
            ladder: Vec::new(),
            bags: inner.bags.clone(),
            tree: inner.tree.clone(),
        };
        let mut copy_ladders: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (i, &(v, w)) in inner.matching.iter().enumerate() {
            let host = inner
                .bags
                .iter()
                .position(|b| b.contains(&v) && b.contains(&w))
                .expect("matching edge covered by a bag");
            for j in 0..self.d {
                let (copy, conn) = pick(i, j);
                let off = out.append(&copy, conn.is_some());
                let centers: Vec<usize> = copy.ladder.iter().map(|&(y, _)| y + off).collect();
                let points: Vec<usize> = copy.ladder.iter().map(|&(_, q)| q + off).collect();
                for u in off..off + copy.n {
                    for a in [v, w] {
                        let weight = conn.as_ref().and_then(|(g, x, p)| {
                            let hit = (a == *x && centers.contains(&u)) || (a == *p && points.contains(&u));
                            hit.then(|| g.clone())
                        });
                        out.edges.push((a.min(u), a.max(u), weight));
                    }
                }
                if let Some((_, x, p)) = conn {
                    copy_ladders.insert(
                        (x, p),
                        copy.ladder.iter().map(|&(y, q)| (y + off, q + off)).collect(),
                    );
                }
                let bag_off = out.bags.len();
                out.bags.extend(copy.bags.iter().map(|b| {
                    let mut b: Vec<usize> = b.iter().map(|&x| x + off).collect();
                    b.push(v);
                    b.push(w);
                    b
                }));
                out.tree.extend(copy.tree.iter().map(|&(a, b)| (a + bag_off, b + bag_off)));
                out.tree.push((host, bag_off));
            }
        }
        for &(x, p) in &inner.ladder {
            out.ladder.extend(copy_ladders.remove(&(x, p)).unwrap_or_default());
        }
        out
    }

    fn weighted(&mut self, k: u64, r: u64, eps: &BigRational) -> Result<Piece> {
        let key = (k, r, eps.clone());
        if let Some(p) = self.weighted.get(&key) {
            return Ok(p.clone());
        }
        let one = BigRational::one();
        let piece = if k == 1 || r == 1 {
            let levels = if k == 1 { r } else { k } as u32;
            let (mut piece, twin_of, _) = base_structure(levels, k != 1, self.d);
            let first_leaf = piece.n - 2 * twin_of.len();
            let tree_n = first_leaf + twin_of.len();
            let (x, p) = (first_leaf, twin_of[0]);
            let (x2, p2) = (first_leaf + 1, twin_of[1]);
            let half = BigRational::new(1.into(), 2.into());
            for e in &mut piece.edges {
                let (a, b) = (e.0, e.1);
                let touches = |v: usize| a == v || b == v;
                let other = |v: usize| if a == v { b } else { a };
                e.2 = if touches(x) || touches(p2) {
                    None
                } else if (touches(p) && other(p) < tree_n) || (touches(x2) && other(x2) < tree_n) {
                    Some(half.clone())
                } else {
                    Some(BigRational::zero())
                };
            }
            piece.ladder = vec![(x, p), (x2, p2)];
            piece
        } else {
            let rr = BigRational::from_integer(r.into());
            let two = BigRational::from_integer(2.into());
            let gamma = (&one - eps) / (&two * &rr * eps);
            let shrink = &one - &two * &gamma * eps;
            let eps_inner = eps / &shrink;
            let inner_r = BigRational::from_integer((r - 1).into());
            if !(eps_inner > BigRational::zero() && eps_inner < one)
                || !(inner_r < (&one - &eps_inner) / &eps_inner)
            {
                return Err(Error::Unreachable(format!(
                    "derived epsilon {eps_inner} breaks the hypothesis at (k, r) = ({k}, {})",
                    r - 1
                )));
            }
            self.record(k, r, eps, &gamma, &eps_inner);
            let mut inner = self.weighted(k, r - 1, &eps_inner)?;
            for e in &mut inner.edges {
                if let Some(w) = &mut e.2 {
                    *w = &*w * &shrink;
                }
            }
            let copy_w = self.weighted(k - 1, r, eps)?;
            let copy_s = self.structure(k - 1, r);
            let connector = &gamma * eps;
            let ladder_of: HashMap<(usize, usize), (usize, usize)> = inner
                .ladder
                .iter()
                .map(|&(x, p)| ((x.min(p), x.max(p)), (x, p)))
                .collect();
            let matching = inner.matching.clone();
            self.attach(inner, |i, j| {
                let (a, b) = matching[i];
                match ladder_of.get(&(a.min(b), a.max(b))) {
                    Some(&(x, p)) if j == 0 => (copy_w.clone(), Some((connector.clone(), x, p))),
                    _ => (copy_s.clone(), None),
                }
            })
        };
        self.weighted.insert(key, piece.clone());
        Ok(piece)
    }

    fn record(&mut self, k: u64, r: u64, eps: &BigRational, gamma: &BigRational, eps_inner: &BigRational) {
        let eps_s = eps.to_string();
        if !self.levels.iter().any(|l| l.k == k && l.r == r && l.epsilon == eps_s) {
            self.levels.push(LevelParams {
                k,
                r,
                epsilon: eps_s,
                gamma: gamma.to_string(),
                epsilon_prime: eps_inner.to_string(),
            });
        }
    }
}

/// A generated instance with its certificates.
#[derive(Debug, Clone)]
pub struct LbInstance {
    pub k: u64,
    pub r: u64,
    pub d: u64,
    pub epsilon: BigRational,
    pub graph: WeightedGraph,
    /// Exact weight of every edge in insertion order (`None` = infinite).
    pub exact_edges: Vec<(usize, usize, Option<BigRational>)>,
    pub matching: Vec<(usize, usize)>,
    /// Width-1 ladder; empty for unweighted builds.
    pub ladder: EpsLadder,
    pub td: TreeDecomposition,
    pub levels: Vec<LevelParams>,
}

fn to_f64(w: &Option<BigRational>) -> f64 {
    w.as_ref().map_or(f64::INFINITY, |q| q.to_f64().unwrap_or(f64::NAN))
}

fn finish(k: u64, r: u64, d: u64, eps: BigRational, piece: Piece, levels: Vec<LevelParams>) -> Result<LbInstance> {
    let mut graph = WeightedGraph::new(piece.n);
    for (u, v, w) in &piece.edges {
        graph.add_edge(*u, *v, to_f64(w))?;
    }
    let td = TreeDecomposition::new(
        piece.bags.into_iter().map(VertexSet::new).collect(),
        piece.tree,
        0,
    );
    let eps_f = eps.to_f64().unwrap_or(f64::NAN);
    Ok(LbInstance {
        k,
        r,
        d,
        epsilon: eps,
        graph,
        exact_edges: piece.edges,
        matching: piece.matching,
        ladder: EpsLadder::new(piece.ladder, eps_f, 1.0),
        td,
        levels,
    })
}

fn check_size(k: u64, r: u64, d: u64) -> Result<()> {
    if k < 1 || r < 1 || d < 1 {
        return invalid("k, r and d must be at least 1");
    }
    let (n, _) = lb_size(k, r, d);
    if n > MAX_LB_VERTICES {
        return Err(Error::TooLarge(format!(
            "G({k}, {r}, {d}) has {n} vertices, limit {MAX_LB_VERTICES}"
        )));
    }
    Ok(())
}

/// Weighted `G(k, r, 2)`; needs `0 < eps < 1` and `r < (1 - eps) / eps`.
pub fn build_lb_instance(k: u64, r: u64, epsilon: &BigRational) -> Result<LbInstance> {
    let one = BigRational::one();
    if !(epsilon > &BigRational::zero() && epsilon < &one) {
        return invalid(format!("epsilon must lie in (0, 1), got {epsilon}"));
    }
    let bound = (&one - epsilon) / epsilon;
    if !(BigRational::from_integer(r.into()) < bound) {
        return invalid(format!("need r < (1 - eps)/eps, but {r} >= {bound}"));
    }
    check_size(k, r, 2)?;
    let mut b = Builder {
        d: 2,
        structures: HashMap::new(),
        weighted: HashMap::new(),
        levels: Vec::new(),
    };
    let piece = b.weighted(k, r, epsilon)?;
    let levels = std::mem::take(&mut b.levels);
    finish(k, r, 2, epsilon.clone(), piece, levels)
}

/// Unweighted `G(k, r, d)` with every edge at weight 1 and no ladder.
pub fn build_lb_structure(k: u64, r: u64, d: u64) -> Result<LbInstance> {
    check_size(k, r, d)?;
    let mut b = Builder {
        d: d as usize,
        structures: HashMap::new(),
        weighted: HashMap::new(),
        levels: Vec::new(),
    };
    let mut piece = b.structure(k, r);
    for e in &mut piece.edges {
        e.2 = Some(BigRational::one());
    }
    finish(k, r, d, BigRational::zero(), piece, Vec::new())
}

/// Exact shortest-path distances over finite edges.
fn exact_distances(n: usize, adj: &[Vec<(usize, BigRational)>], source: usize) -> Vec<Option<BigRational>> {
    let mut dist: Vec<Option<BigRational>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[source] = Some(BigRational::zero());
    heap.push(Reverse((BigRational::zero(), source)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist[u].as_ref() != Some(&d) {
            continue;
        }
        for (w, wt) in &adj[u] {
            let nd = &d + wt;
            if dist[*w].as_ref().is_none_or(|cur| &nd < cur) {
                dist[*w] = Some(nd.clone());
                heap.push(Reverse((nd, *w)));
            }
        }
    }
    dist
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LbCheck {
    pub length: usize,
    pub expected_length: String,
    pub length_ok: bool,
    /// Ladder conditions and the two extras, in exact arithmetic.
    pub ladder_ok: bool,
    pub ladder_detail: Option<String>,
    pub matching_ok: bool,
    pub td_valid: bool,
    pub td_width: Option<usize>,
    pub width_ok: bool,
    pub twins_share_bag: bool,
}

impl LbCheck {
    pub fn all(&self) -> bool {
        self.length_ok && self.ladder_ok && self.matching_ok && self.td_valid && self.width_ok && self.twins_share_bag
    }
}

/// Re-verifies every certificate of a weighted instance with exact
/// rational distances.
pub fn verify_lb_instance(inst: &LbInstance) -> Result<LbCheck> {
    let n = inst.graph.vertex_count();
    let mut adj: Vec<Vec<(usize, BigRational)>> = vec![Vec::new(); n];
    for (u, v, w) in &inst.exact_edges {
        if let Some(w) = w {
            adj[*u].push((*v, w.clone()));
            adj[*v].push((*u, w.clone()));
        }
    }
    let pairs = &inst.ladder.pairs;
    let from_point: Vec<Vec<Option<BigRational>>> =
        pairs.iter().map(|&(_, p)| exact_distances(n, &adj, p)).collect();
    let one = BigRational::one();
    let far = &one + &inst.epsilon;
    let mut detail = None;
    'outer: for (i, &(x, _)) in pairs.iter().enumerate() {
        if from_point[i][x].as_ref().is_some_and(|d| d <= &far) {
            detail = Some(format!("pair {} too close to its own center", i + 1));
            break;
        }
        for j in 0..i {
            if from_point[j][x].as_ref().is_none_or(|d| d > &one) {
                detail = Some(format!("point {} farther than 1 from center {}", j + 1, i + 1));
                break 'outer;
            }
        }
        for (j, &(xj, _)) in pairs.iter().enumerate() {
            if from_point[i][xj].as_ref().is_some_and(|d| d < &one) {
                detail = Some(format!("center {} closer than 1 to point {}", j + 1, i + 1));
                break 'outer;
            }
        }
    }
    let matched: std::collections::HashSet<(usize, usize)> =
        inst.matching.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let mut used = vec![false; n];
    let mut matching_ok = inst.matching.len() == matched.len();
    for &(a, b) in &inst.matching {
        matching_ok &= inst.graph.has_edge(a, b) && !used[a] && !used[b];
        used[a] = true;
        used[b] = true;
    }
    matching_ok &= pairs.iter().all(|&(x, p)| matched.contains(&(x.min(p), x.max(p))));
    let rep = validate_tree_decomposition(&inst.graph, &inst.td);
    let twins_share_bag = inst.matching.iter().all(|&(a, b)| {
        inst.td.bags.iter().any(|bag| bag.contains(a) && bag.contains(b))
    });
    let expected = lb_ladder_length(inst.k, inst.r)?;
    Ok(LbCheck {
        length: pairs.len(),
        expected_length: expected.to_string(),
        length_ok: BigUint::from(pairs.len()) == expected,
        ladder_ok: detail.is_none(),
        ladder_detail: detail,
        matching_ok,
        td_valid: rep.valid,
        td_width: rep.width,
        width_ok: rep.width.is_some_and(|w| w as u64 <= 2 * inst.k),
        twins_share_bag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::parse_rational;
    use crate::ladder::{validate_ladder, LadderChecks};

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn ladder_lengths() {
        assert_eq!(lb_ladder_length(1, 5).unwrap(), BigUint::from(2u32));
        assert_eq!(lb_ladder_length(2, 2).unwrap(), BigUint::from(4u32));
        assert_eq!(lb_ladder_length(3, 3).unwrap(), BigUint::from(64u32));
        for k in 1..8u64 {
            for r in 1..8u64 {
                if k + r <= 8 {
                    assert_eq!(
                        lb_ladder_length(k + 1, r + 1).unwrap(),
                        lb_ladder_length(k + 1, r).unwrap() * lb_ladder_length(k, r + 1).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn sizes() {
        assert_eq!(lb_size(1, 2, 2).0, 11);
        assert_eq!(lb_size(2, 2, 2).0, 99);
        assert_eq!(lb_size(3, 2, 2).0, 1607);
    }

    #[test]
    fn base_case_k1_r2() {
        let inst = build_lb_instance(1, 2, &q("0.1")).unwrap();
        assert_eq!(inst.graph.vertex_count(), 11);
        assert_eq!(inst.ladder.len(), 2);
        let chk = verify_lb_instance(&inst).unwrap();
        assert!(chk.all(), "{chk:?}");
        // every edge at x and at p' is infinite
        let (x, _) = inst.ladder.pairs[0];
        let (_, p2) = inst.ladder.pairs[1];
        for e in inst.graph.edges() {
            if e.u == x || e.v == x || e.u == p2 || e.v == p2 {
                assert!(e.is_structural());
            }
        }
        let checks = LadderChecks {
            lb_extra: true,
            matching: Some(&inst.matching),
            tolerance: 0.0,
        };
        assert!(validate_ladder(&inst.graph, &inst.ladder, &checks).valid);
    }

    #[test]
    fn two_two_has_99_vertices_and_length_4() {
        let inst = build_lb_instance(2, 2, &q("0.1")).unwrap();
        assert_eq!(inst.graph.vertex_count(), 99);
        let chk = verify_lb_instance(&inst).unwrap();
        assert!(chk.all(), "{chk:?}");
        assert_eq!(chk.length, 4);
        assert!(chk.td_width.unwrap() <= 4);
        assert_eq!(inst.levels.len(), 1);
    }

    #[test]
    fn one_one_with_larger_eps() {
        let inst = build_lb_instance(1, 1, &q("0.3")).unwrap();
        assert!(verify_lb_instance(&inst).unwrap().all());
        assert_eq!(inst.ladder.len(), 2);
    }

    #[test]
    fn hypothesis_enforced() {
        assert!(build_lb_instance(1, 3, &q("0.3")).is_err());
        assert!(build_lb_instance(1, 1, &q("1")).is_err());
        assert!(build_lb_instance(0, 1, &q("0.1")).is_err());
    }

    #[test]
    fn structure_for_other_d() {
        let inst = build_lb_structure(2, 2, 3).unwrap();
        assert_eq!(inst.graph.vertex_count() as u128, lb_size(2, 2, 3).0);
        let rep = validate_tree_decomposition(&inst.graph, &inst.td);
        assert!(rep.valid);
        assert!(rep.width.unwrap() <= 4);
    }
}
