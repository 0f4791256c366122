//! k-Center coresets: constant-factor seeding, per-radius ladder sequences
//! grown by greedy set cover, and an exhaustive verifier.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::bounds::{binomial, minor_free_wcol_bound, rational_from_f64};
use crate::error::{invalid, Error, Result};
use crate::graph::{distances_from, greedy_maximal_scattered, VertexSet, WeightedGraph};

/// Candidate center sets enumerated by the verifier at most.
pub const VERIFY_MAX_SUBSETS: u128 = 20_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringInstance {
    pub graph: WeightedGraph,
    pub clients: VertexSet,
    pub facilities: VertexSet,
    pub k: usize,
}

impl ClusteringInstance {
    pub fn new(graph: WeightedGraph, clients: VertexSet, facilities: VertexSet, k: usize) -> Result<Self> {
        if clients.is_empty() || facilities.is_empty() {
            return invalid("clients and facilities must be nonempty");
        }
        if k == 0 {
            return invalid("k must be positive");
        }
        graph.check_set(&clients)?;
        graph.check_set(&facilities)?;
        let inst = ClusteringInstance { graph, clients, facilities, k };
        let d = distances_from(&inst.graph, inst.facilities.iter(), None, f64::INFINITY);
        if let Some(p) = inst.clients.iter().find(|&p| d[p].is_infinite()) {
            return Err(Error::Unreachable(format!("client {} reaches no facility", p + 1)));
        }
        Ok(inst)
    }

    pub fn facilities_are_all_vertices(&self) -> bool {
        self.facilities.len() == self.graph.vertex_count()
    }
}

/// `rows[i][v]` = distance from the `i`-th facility to `v`.
struct FacilityTable {
    ids: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl FacilityTable {
    fn new(inst: &ClusteringInstance) -> Self {
        let ids: Vec<usize> = inst.facilities.iter().collect();
        let rows = ids
            .iter()
            .map(|&f| distances_from(&inst.graph, [f], None, f64::INFINITY))
            .collect();
        FacilityTable { ids, rows }
    }

    fn index(&self, f: usize) -> usize {
        self.ids.binary_search(&f).expect("facility")
    }

    fn dist_to_set(&self, v: usize, set: &VertexSet) -> f64 {
        set.iter().map(|f| self.rows[self.index(f)][v]).fold(f64::INFINITY, f64::min)
    }
}

/// Constant-factor k-Center solution `(X, r, beta)`.
pub fn greedy_kcenter_seed(inst: &ClusteringInstance) -> Result<(VertexSet, f64, f64)> {
    let g = &inst.graph;
    let clients: Vec<usize> = inst.clients.iter().collect();
    let farthest = |d: &[f64]| {
        clients
            .iter()
            .copied()
            .fold(None::<(usize, f64)>, |best, p| match best {
                Some((_, bd)) if bd >= d[p] => best,
                _ => Some((p, d[p])),
            })
            .expect("nonempty clients")
    };
    let mut centers: Vec<usize> = Vec::new();
    let mut dist = vec![f64::INFINITY; g.vertex_count()];
    let relax = |dist: &mut Vec<f64>, c: usize| {
        let d = distances_from(g, [c], None, f64::INFINITY);
        for (a, b) in dist.iter_mut().zip(d) {
            *a = a.min(b);
        }
    };
    let beta = if inst.facilities_are_all_vertices() {
        centers.push(clients[0]);
        relax(&mut dist, clients[0]);
        while centers.len() < inst.k {
            let (q, dq) = farthest(&dist);
            if dq <= 0.0 {
                break;
            }
            centers.push(q);
            relax(&mut dist, q);
        }
        2.0
    } else {
        let table = FacilityTable::new(inst);
        while centers.len() < inst.k {
            let (q, _) = farthest(&dist);
            let f = (0..table.ids.len())
                .fold(None::<(usize, f64)>, |best, i| match best {
                    Some((_, bd)) if bd <= table.rows[i][q] => best,
                    _ => Some((table.ids[i], table.rows[i][q])),
                })
                .map(|(f, _)| f)
                .expect("nonempty facilities");
            if centers.contains(&f) {
                break;
            }
            centers.push(f);
            relax(&mut dist, f);
        }
        3.0
    };
    let r = clients.iter().map(|&p| dist[p]).fold(0.0, f64::max);
    if r.is_infinite() {
        return Err(Error::Unreachable("some client reaches no seed center".into()));
    }
    Ok((VertexSet::new(centers), r, beta))
}

/// One radius level: `dist(p_i, X_i) > (1 + delta) radius` and
/// `dist(p_i, X_j) <= radius` for `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderSequence {
    pub radius: f64,
    pub delta: f64,
    pub pairs: Vec<(VertexSet, usize)>,
}

impl LadderSequence {
    pub fn points(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|(_, p)| *p)
    }
}

fn extend_with(
    inst: &ClusteringInstance,
    table: &FacilityTable,
    p_set: &VertexSet,
    r: f64,
    delta: f64,
    cap: usize,
) -> Option<(VertexSet, usize)> {
    let elems: Vec<usize> = p_set.iter().collect();
    let far = (1.0 + delta) * r;
    for p in inst.clients.iter().filter(|&p| !p_set.contains(p)) {
        if elems.is_empty() {
            return Some((VertexSet::default(), p));
        }
        // E_v for facilities far from p, as bitsets over elems.
        let systems: Vec<(usize, Vec<bool>)> = (0..table.ids.len())
            .filter(|&i| table.rows[i][p] > far)
            .map(|i| (table.ids[i], elems.iter().map(|&q| table.rows[i][q] <= r).collect()))
            .collect();
        let mut covered = vec![false; elems.len()];
        let mut left = elems.len();
        let mut chosen = Vec::new();
        while left > 0 && chosen.len() < cap {
            let best = systems
                .iter()
                .map(|(v, s)| (*v, s.iter().zip(&covered).filter(|(a, c)| **a && !**c).count()))
                .fold(None::<(usize, usize)>, |b, (v, gain)| match b {
                    Some((_, bg)) if bg >= gain => b,
                    _ => Some((v, gain)),
                });
            let Some((v, gain)) = best.filter(|&(_, gain)| gain > 0) else {
                break;
            };
            let s = &systems.iter().find(|(u, _)| *u == v).unwrap().1;
            for (c, &a) in covered.iter_mut().zip(s) {
                *c |= a;
            }
            left -= gain;
            chosen.push(v);
        }
        if left == 0 {
            return Some((VertexSet::new(chosen), p));
        }
    }
    None
}

/// Tries to append a pair `(X, p)` to a sequence whose points are `p_set`:
/// `X` covers `p_set` within `r`, stays farther than `(1 + delta) r` from
/// `p`, and has at most `cap` facilities (greedy set cover).
pub fn extend_sequence(
    inst: &ClusteringInstance,
    p_set: &VertexSet,
    r: f64,
    delta: f64,
    cap: usize,
) -> Result<Option<(VertexSet, usize)>> {
    if cap == 0 {
        return invalid("cap must be at least 1");
    }
    if !(r > 0.0) || !(delta > 0.0) {
        return invalid("radius and delta must be positive");
    }
    inst.graph.check_set(p_set)?;
    Ok(extend_with(inst, &FacilityTable::new(inst), p_set, r, delta, cap))
}

/// `k * ceil(ln(max(l, 2)) + 1)`.
pub fn set_cover_cap(k: usize, l: usize) -> usize {
    k * ((l.max(2) as f64).ln() + 1.0).ceil() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoresetParams {
    pub epsilon: f64,
    pub delta: f64,
    pub r_tilde: f64,
    pub r_star: f64,
    pub beta: f64,
    pub seed_centers: VertexSet,
    /// Present only when an excluded-minor size `h` was given.
    pub c: Option<String>,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    /// log2 of the per-level sequence-length bound.
    pub length_bound_log2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoresetResult {
    pub s: VertexSet,
    pub z: VertexSet,
    pub levels: Vec<LadderSequence>,
    pub params: CoresetParams,
}

impl CoresetResult {
    pub fn level_bound(&self) -> f64 {
        9.0 / self.params.epsilon.powi(3)
    }
}

fn lambda_fixed_point(c: f64, k: f64, eps: f64) -> (f64, f64) {
    let gamma = 3.0 * (c + 1.0) * (2.0 * k + c * (4.0 + 3.0 / eps + 2.0 * k));
    let rhs = |l: f64| (c + 1.0) * (1.0 + c.log2() + (l * k + 2.0).log2() + c * (3.0 / eps + 2.0).log2());
    let mut l = 1.0f64;
    for _ in 0..200 {
        let next = rhs(l).ceil().min(gamma);
        if next <= l {
            break;
        }
        l = next;
    }
    (l, gamma)
}

pub fn build_coreset(inst: &ClusteringInstance, epsilon: f64, h: Option<u64>) -> Result<CoresetResult> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return invalid(format!("epsilon must lie in (0, 1), got {epsilon}"));
    }
    let (seed, r_tilde, beta) = greedy_kcenter_seed(inst)?;
    let delta = (1.0 + epsilon).sqrt() - 1.0;
    let r_star = r_tilde / (beta * (1.0 + epsilon));
    let (c, lambda, gamma, length_bound_log2) = match h {
        Some(h) => {
            let x = rational_from_f64(9.0 / epsilon)?;
            let c = minor_free_wcol_bound(h, &x)?;
            let cf = c.to_f64().unwrap_or(f64::INFINITY);
            let (l, g) = lambda_fixed_point(cf, inst.k as f64, epsilon);
            let m = 1.0 + cf.log2() + (l * inst.k as f64 + 2.0).log2() + cf * (3.0 / epsilon + 2.0).log2();
            (Some(c.to_string()), Some(l), Some(g), Some((cf + 1.0) * m))
        }
        None => (None, None, None, None),
    };
    let params = CoresetParams {
        epsilon,
        delta,
        r_tilde,
        r_star,
        beta,
        seed_centers: seed,
        c,
        lambda,
        gamma,
        length_bound_log2,
    };
    if r_tilde == 0.0 {
        let z = greedy_maximal_scattered(&inst.graph, &inst.clients, 0.0);
        return Ok(CoresetResult { s: z.clone(), z, levels: Vec::new(), params });
    }
    let z = greedy_maximal_scattered(&inst.graph, &inst.clients, 2.0 * r_tilde);
    if z.len() > inst.k {
        return Err(Error::Unreachable(format!(
            "{} clients pairwise farther than 2r~ but k = {}",
            z.len(),
            inst.k
        )));
    }
    let table = FacilityTable::new(inst);
    let ceiling = beta * (1.0 + delta) * r_tilde / epsilon;
    let mut levels = Vec::new();
    let mut s: Vec<usize> = z.iter().collect();
    for t in 0.. {
        let radius = (1.0 + delta).powi(t) * r_star;
        if radius > ceiling {
            break;
        }
        let mut pairs: Vec<(VertexSet, usize)> = Vec::new();
        let mut p_set = VertexSet::default();
        while let Some((x, p)) = extend_with(inst, &table, &p_set, radius, delta, set_cover_cap(inst.k, p_set.len())) {
            p_set = p_set.union(&VertexSet::singleton(p));
            pairs.push((x, p));
        }
        s.extend(p_set.iter());
        levels.push(LadderSequence { radius, delta, pairs });
    }
    Ok(CoresetResult { s: VertexSet::new(s), z, levels, params })
}

/// Which invariant of a [`LadderSequence`] fails first, if any.
pub fn check_ladder_sequence(inst: &ClusteringInstance, seq: &LadderSequence, max_size: usize) -> Result<Option<String>> {
    let table = FacilityTable::new(inst);
    for (i, (x, p)) in seq.pairs.iter().enumerate() {
        inst.graph.check_set(x)?;
        if !x.is_subset(&inst.facilities) || !inst.clients.contains(*p) {
            return Ok(Some(format!("pair {} uses a non-facility or non-client", i + 1)));
        }
        if x.len() > max_size {
            return Ok(Some(format!("pair {} has {} facilities", i + 1, x.len())));
        }
        if !(table.dist_to_set(*p, x) > (1.0 + seq.delta) * seq.radius) {
            return Ok(Some(format!("pair {} point too close to its own set", i + 1)));
        }
        for (j, (_, q)) in seq.pairs[..i].iter().enumerate() {
            if !(table.dist_to_set(*q, x) <= seq.radius) {
                return Ok(Some(format!("point {} too far from set {}", j + 1, i + 1)));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoresetReport {
    pub ok: bool,
    pub worst_ratio: f64,
    pub witness: VertexSet,
    pub subsets_checked: u64,
}

/// Enumerates every facility set of size `1..=k_max` and compares the
/// k-Center cost over all clients with the cost over `s`.
pub fn verify_coreset_bruteforce(
    inst: &ClusteringInstance,
    s: &VertexSet,
    epsilon: f64,
    k_max: usize,
) -> Result<CoresetReport> {
    inst.graph.check_set(s)?;
    if !s.is_subset(&inst.clients) {
        return invalid("coreset contains a non-client");
    }
    if k_max == 0 {
        return invalid("k_max must be positive");
    }
    let nf = inst.facilities.len() as u64;
    let total: BigUint = (1..=k_max.min(nf as usize) as u64).map(|j| binomial(nf, j)).sum();
    if total > BigUint::from(VERIFY_MAX_SUBSETS) {
        return Err(Error::TooLarge(format!("{total} candidate center sets")));
    }
    let table = FacilityTable::new(inst);
    let clients: Vec<usize> = inst.clients.iter().collect();
    let in_s: Vec<bool> = clients.iter().map(|&p| s.contains(p)).collect();
    let mut state = Enum {
        table: &table,
        clients: &clients,
        in_s: &in_s,
        worst: 1.0,
        witness: Vec::new(),
        stack: Vec::new(),
        checked: 0,
    };
    let start = vec![f64::INFINITY; clients.len()];
    state.walk(0, k_max, &start);
    let worst = state.worst;
    Ok(CoresetReport {
        ok: worst <= 1.0 + epsilon,
        worst_ratio: worst,
        witness: VertexSet::new(state.witness.iter().map(|&i| table.ids[i]).collect()),
        subsets_checked: state.checked,
    })
}

struct Enum<'a> {
    table: &'a FacilityTable,
    clients: &'a [usize],
    in_s: &'a [bool],
    worst: f64,
    witness: Vec<usize>,
    stack: Vec<usize>,
    checked: u64,
}

impl Enum<'_> {
    fn walk(&mut self, from: usize, left: usize, dist: &[f64]) {
        if left == 0 {
            return;
        }
        for i in from..self.table.ids.len() {
            let row = &self.table.rows[i];
            let next: Vec<f64> = dist.iter().zip(self.clients).map(|(&d, &p)| d.min(row[p])).collect();
            self.stack.push(i);
            self.checked += 1;
            let all = next.iter().copied().fold(0.0, f64::max);
            let sub = next
                .iter()
                .zip(self.in_s)
                .filter(|(_, s)| **s)
                .map(|(d, _)| *d)
                .fold(0.0, f64::max);
            let ratio = if all <= sub { 1.0 } else { all / sub };
            if ratio > self.worst || (self.witness.is_empty() && ratio >= self.worst) {
                self.worst = ratio;
                self.witness = self.stack.clone();
            }
            self.walk(i + 1, left - 1, &next);
            self.stack.pop();
        }
    }
}

/// `n` client/center pairs with `dist(p_i, x_i) = 1 + eps` and every cross
/// distance 1. Centers are `0..n`, clients `n..2n`; `k = 1`.
pub fn counterexample_instance(n: usize, epsilon: f64) -> Result<ClusteringInstance> {
    if n < 2 || !(epsilon > 0.0 && epsilon < 1.0) {
        return invalid("need n >= 2 and epsilon in (0, 1)");
    }
    let mut g = WeightedGraph::new(2 * n);
    for i in 0..n {
        for j in 0..n {
            g.add_edge(i, n + j, if i == j { 1.0 + epsilon } else { 1.0 })?;
        }
    }
    ClusteringInstance::new(g, (n..2 * n).collect(), (0..n).collect(), 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_grid, gen_partial_ktree};
    use proptest::prelude::*;

    fn path(n: usize) -> WeightedGraph {
        WeightedGraph::from_edges(n, (1..n).map(|i| (i - 1, i, 1.0))).unwrap()
    }

    fn star(leaves: usize) -> WeightedGraph {
        WeightedGraph::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i, 1.0))).unwrap()
    }

    #[test]
    fn seed_on_a_star() {
        let inst = ClusteringInstance::new(star(4), (1..5).collect(), VertexSet::all(5), 1).unwrap();
        let (x, r, beta) = greedy_kcenter_seed(&inst).unwrap();
        assert_eq!(x.len(), 1);
        assert!(r <= 2.0);
        assert_eq!(beta, 2.0);
    }

    #[test]
    fn seed_on_a_path_supplier() {
        let inst = ClusteringInstance::new(path(3), VertexSet::new(vec![0, 2]), VertexSet::singleton(1), 1).unwrap();
        assert_eq!(greedy_kcenter_seed(&inst).unwrap(), (VertexSet::singleton(1), 1.0, 3.0));
    }

    #[test]
    fn seed_degenerate() {
        let inst = ClusteringInstance::new(path(3), VertexSet::all(3), VertexSet::all(3), 3).unwrap();
        let (_, r, _) = greedy_kcenter_seed(&inst).unwrap();
        assert_eq!(r, 0.0);
        let res = build_coreset(&inst, 0.5, None).unwrap();
        assert_eq!(res.s, VertexSet::all(3));
        assert!(res.levels.is_empty());
    }

    #[test]
    fn unreachable_client_rejected() {
        let g = WeightedGraph::new(2);
        assert!(ClusteringInstance::new(g, VertexSet::singleton(0), VertexSet::singleton(1), 1).is_err());
    }

    #[test]
    fn extend_examples() {
        // a(c) b(f) c(c) d(f) e(c)
        let inst = ClusteringInstance::new(path(5), VertexSet::new(vec![0, 2, 4]), VertexSet::new(vec![1, 3]), 1).unwrap();
        assert_eq!(
            extend_sequence(&inst, &VertexSet::default(), 1.0, 0.2, 1).unwrap(),
            Some((VertexSet::default(), 0))
        );
        assert_eq!(
            extend_sequence(&inst, &VertexSet::singleton(0), 1.0, 0.2, 1).unwrap(),
            Some((VertexSet::singleton(1), 4))
        );
        assert_eq!(extend_sequence(&inst, &VertexSet::new(vec![0, 2, 4]), 1.0, 0.2, 3).unwrap(), None);
        assert!(extend_sequence(&inst, &VertexSet::default(), 1.0, 0.2, 0).is_err());
    }

    #[test]
    fn star_coreset_verifies() {
        let inst = ClusteringInstance::new(star(5), (1..6).collect(), VertexSet::all(6), 1).unwrap();
        let res = build_coreset(&inst, 0.5, Some(3)).unwrap();
        assert!(res.z.is_subset(&res.s));
        assert_eq!(res.z.len(), 1);
        assert!((res.levels.len() as f64) <= res.level_bound());
        assert!(res.params.lambda.unwrap() <= res.params.gamma.unwrap());
        assert!(verify_coreset_bruteforce(&inst, &res.s, 0.5, 1).unwrap().ok);
    }

    #[test]
    fn full_client_set_has_ratio_one() {
        let g = gen_grid(3, 4, (1.0, 5.0), 3).unwrap();
        let inst = ClusteringInstance::new(g, VertexSet::all(12), VertexSet::new(vec![0, 5, 7, 11]), 2).unwrap();
        let rep = verify_coreset_bruteforce(&inst, &inst.clients, 0.1, 2).unwrap();
        assert_eq!(rep.worst_ratio, 1.0);
        assert!(rep.ok);
    }

    #[test]
    fn counterexample_boundary() {
        let eps = 0.25;
        let inst = counterexample_instance(4, eps).unwrap();
        let s = VertexSet::new(vec![4, 5, 7]);
        let rep = verify_coreset_bruteforce(&inst, &s, eps, 1).unwrap();
        assert_eq!(rep.worst_ratio, 1.0 + eps);
        assert_eq!(rep.witness, VertexSet::singleton(2));
        assert!(rep.ok);
        assert!(!verify_coreset_bruteforce(&inst, &s, eps * 0.999, 1).unwrap().ok);
    }

    #[test]
    fn coreset_on_counterexample_keeps_every_client() {
        let inst = counterexample_instance(5, 0.3).unwrap();
        let res = build_coreset(&inst, 0.3, None).unwrap();
        assert_eq!(res.s, inst.clients);
    }

    #[test]
    fn twelve_vertex_instance() {
        let (g, _) = gen_partial_ktree(12, 2, 0.8, (1.0, 10.0), 17).unwrap();
        let inst = ClusteringInstance::new(g, VertexSet::all(12), VertexSet::all(12), 2).unwrap();
        let res = build_coreset(&inst, 0.5, None).unwrap();
        assert!(verify_coreset_bruteforce(&inst, &res.s, 0.5, 2).unwrap().ok);
    }

    fn subsets(ids: &[usize], max: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for &f in ids {
            let more: Vec<Vec<usize>> = out
                .iter()
                .filter(|s| s.len() < max)
                .map(|s| s.iter().copied().chain([f]).collect())
                .collect();
            out.extend(more);
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn sequences_hold_and_stop_correctly(seed in 0u64..10_000, k in 1usize..3, eps_i in 0usize..2) {
            let eps = [0.25, 0.5][eps_i];
            let (g, _) = gen_partial_ktree(10, 2, 1.0, (1.0, 10.0), seed).unwrap();
            let fac: VertexSet = (0..10).filter(|v| v % 2 == 0 || *v == 9).collect();
            let inst = ClusteringInstance::new(g, VertexSet::all(10), fac.clone(), k).unwrap();
            let res = build_coreset(&inst, eps, None).unwrap();
            prop_assert_eq!(&res, &build_coreset(&inst, eps, None).unwrap());
            prop_assert!((res.levels.len() as f64) <= res.level_bound());
            let table = FacilityTable::new(&inst);
            let fids: Vec<usize> = fac.iter().collect();
            for lvl in &res.levels {
                let cap = set_cover_cap(k, inst.clients.len());
                prop_assert_eq!(check_ladder_sequence(&inst, lvl, cap).unwrap(), None);
                // nothing of size <= k extends a finished level
                let pts: Vec<usize> = lvl.points().collect();
                for x in subsets(&fids, k) {
                    let x = VertexSet::new(x);
                    let covers = pts.iter().all(|&q| table.dist_to_set(q, &x) <= lvl.radius);
                    if !covers { continue; }
                    for p in inst.clients.iter().filter(|p| !pts.contains(p)) {
                        prop_assert!(!(table.dist_to_set(p, &x) > (1.0 + lvl.delta) * lvl.radius));
                    }
                }
            }
            prop_assert!(verify_coreset_bruteforce(&inst, &res.s, eps, k).unwrap().ok);
        }
    }
}
