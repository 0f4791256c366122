//! Weighted undirected graphs and the shortest-path primitives everything
//! else is built on.
//!
//! Vertices are `0..n` internally; the file formats and JSON reports shift
//! them to `1..=n`. An edge of weight `+inf` is *structural*: it exists for
//! adjacency and tree-decomposition purposes but no path may use it.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// One undirected edge, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    pub fn is_structural(&self) -> bool {
        self.weight.is_infinite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<(usize, f64)>>,
    index: HashMap<(usize, usize), usize>,
}

impl WeightedGraph {
    pub fn new(n: usize) -> Self {
        WeightedGraph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
            index: HashMap::new(),
        }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut g = WeightedGraph::new(n);
        for (u, v, w) in edges {
            g.add_edge(u, v, w)?;
        }
        Ok(g)
    }

    /// Adds the edge `uv`. Self-loops, parallel edges, negative or NaN
    /// weights are rejected; `+inf` marks a structural edge.
    pub fn add_edge(&mut self, u: usize, v: usize, weight: f64) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return invalid(format!("self-loop at vertex {u}"));
        }
        if weight.is_nan() || weight < 0.0 {
            return invalid(format!("edge {u}-{v} has invalid weight {weight}"));
        }
        let key = (u.min(v), u.max(v));
        if self.index.contains_key(&key) {
            return invalid(format!("parallel edge {}-{}", key.0, key.1));
        }
        self.index.insert(key, self.edges.len());
        self.edges.push(Edge {
            u: key.0,
            v: key.1,
            weight,
        });
        self.adj[u].push((v, weight));
        self.adj[v].push((u, weight));
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of `u` together with the connecting edge weight.
    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adj[u]
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.index
            .get(&(u.min(v), u.max(v)))
            .map(|&i| self.edges[i].weight)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.weight(u, v).is_some()
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n {
            Err(Error::VertexOutOfRange {
                vertex: v,
                n: self.n,
            })
        } else {
            Ok(())
        }
    }

    pub fn check_set(&self, set: &VertexSet) -> Result<()> {
        match set.as_slice().last() {
            Some(&v) => self.check_vertex(v),
            None => Ok(()),
        }
    }

    /// Subgraph with the vertices of `removed` isolated (all their edges
    /// dropped). Vertex ids are preserved.
    pub fn without(&self, removed: &[bool]) -> WeightedGraph {
        let mut g = WeightedGraph::new(self.n);
        for e in &self.edges {
            if !removed[e.u] && !removed[e.v] {
                g.add_edge(e.u, e.v, e.weight).expect("edge copied from a valid graph");
            }
        }
        g
    }

    /// Connected components using only finite-weight edges, restricted to
    /// `mask` when given. Components are listed by smallest vertex.
    pub fn components(&self, mask: Option<&[bool]>) -> Vec<VertexSet> {
        let inside = |v: usize| mask.is_none_or(|m| m[v]);
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] || !inside(s) {
                continue;
            }
            seen[s] = true;
            let mut stack = vec![s];
            let mut comp = Vec::new();
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &(w, wt) in &self.adj[u] {
                    if wt.is_finite() && !seen[w] && inside(w) {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            out.push(VertexSet::new(comp));
        }
        out
    }
}

/// Sorted set of distinct vertex ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(mut vertices: Vec<usize>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        VertexSet(vertices)
    }

    pub fn singleton(v: usize) -> Self {
        VertexSet(vec![v])
    }

    pub fn all(n: usize) -> Self {
        VertexSet((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::iter::Copied<std::slice::Iter<'_, usize>> {
        self.0.iter().copied()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for v in self.iter() {
            m[v] = true;
        }
        m
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet::new(self.iter().chain(other.iter()).collect())
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VertexSet::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = usize;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, usize>>;
    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

/// Distances from a source set; `+inf` marks unreachable vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMap(Vec<f64>);

impl DistanceMap {
    pub fn get(&self, v: usize) -> f64 {
        self.0[v]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Minimum distance to any vertex of `set` (`+inf` for the empty set).
    pub fn min_over(&self, set: &VertexSet) -> f64 {
        set.iter().map(|v| self.0[v]).fold(f64::INFINITY, f64::min)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    label: usize,
    vertex: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.label.cmp(&self.label))
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Output of a labelled multi-source search: every vertex gets the source
/// label minimising `(distance, label)` and a parent on a shortest path to
/// a source carrying that label.
#[derive(Debug, Clone)]
pub struct Search {
    pub dist: Vec<f64>,
    pub label: Vec<usize>,
    pub parent: Vec<Option<usize>>,
}

/// Multi-source Dijkstra in `G[mask]` with lexicographic `(distance, label)`
/// keys. Vertices farther than `bound` are left at `+inf`.
pub(crate) fn labelled_search(
    g: &WeightedGraph,
    sources: impl IntoIterator<Item = (usize, usize)>,
    mask: Option<&[bool]>,
    bound: f64,
) -> Search {
    let n = g.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut label = vec![usize::MAX; n];
    let mut parent = vec![None; n];
    let mut heap = BinaryHeap::new();
    let inside = |v: usize| mask.is_none_or(|m| m[v]);
    for (s, lab) in sources {
        if !inside(s) {
            continue;
        }
        if (0.0, lab) < (dist[s], label[s]) {
            dist[s] = 0.0;
            label[s] = lab;
            heap.push(HeapEntry {
                dist: 0.0,
                label: lab,
                vertex: s,
            });
        }
    }
    let mut done = vec![false; n];
    while let Some(HeapEntry { dist: d, label: lab, vertex: u }) = heap.pop() {
        if done[u] || d != dist[u] || lab != label[u] {
            continue;
        }
        done[u] = true;
        for &(w, wt) in g.neighbors(u) {
            if !wt.is_finite() || !inside(w) || done[w] {
                continue;
            }
            let nd = d + wt;
            if nd > bound {
                continue;
            }
            if (nd, lab) < (dist[w], label[w]) {
                dist[w] = nd;
                label[w] = lab;
                parent[w] = Some(u);
                heap.push(HeapEntry {
                    dist: nd,
                    label: lab,
                    vertex: w,
                });
            }
        }
    }
    Search {
        dist,
        label,
        parent,
    }
}

/// Plain multi-source distances in `G[mask]`, pruned beyond `bound`.
pub(crate) fn distances_from(
    g: &WeightedGraph,
    sources: impl IntoIterator<Item = usize>,
    mask: Option<&[bool]>,
    bound: f64,
) -> Vec<f64> {
    labelled_search(g, sources.into_iter().map(|s| (s, 0)), mask, bound).dist
}

/// Exact multi-source shortest-path distances in `G[restrict_to]` (or `G`).
pub fn sssp_distances(
    g: &WeightedGraph,
    sources: &VertexSet,
    restrict_to: Option<&VertexSet>,
) -> Result<DistanceMap> {
    if sources.is_empty() {
        return invalid("empty source set");
    }
    g.check_set(sources)?;
    let mask = match restrict_to {
        Some(r) => {
            g.check_set(r)?;
            if !sources.is_subset(r) {
                return invalid("sources are not contained in the restriction set");
            }
            Some(r.mask(g.vertex_count()))
        }
        None => None,
    };
    Ok(DistanceMap(distances_from(
        g,
        sources.iter(),
        mask.as_deref(),
        f64::INFINITY,
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DiameterMode {
    /// Distances measured in `G[A]`.
    Strong,
    /// Distances measured in `G`.
    Weak,
}

/// Largest pairwise distance inside `set`, measured in `G` or `G[set]`.
pub fn set_diameter(g: &WeightedGraph, set: &VertexSet, mode: DiameterMode) -> Result<f64> {
    if set.is_empty() {
        return invalid("diameter of an empty set");
    }
    g.check_set(set)?;
    let mask = match mode {
        DiameterMode::Strong => Some(set.mask(g.vertex_count())),
        DiameterMode::Weak => None,
    };
    let mut diam: f64 = 0.0;
    for s in set.iter() {
        let d = distances_from(g, [s], mask.as_deref(), f64::INFINITY);
        for t in set.iter() {
            diam = diam.max(d[t]);
        }
        if diam.is_infinite() {
            break;
        }
    }
    Ok(diam)
}

/// Whether every two distinct vertices of `set` are at distance `> r`
/// (unreachable counts as farther than any `r`).
pub fn is_scattered(
    g: &WeightedGraph,
    set: &VertexSet,
    r: f64,
    restrict_to: Option<&VertexSet>,
) -> Result<bool> {
    g.check_set(set)?;
    let mask = match restrict_to {
        Some(res) => {
            g.check_set(res)?;
            if !set.is_subset(res) {
                return invalid("scattered-set candidate leaves the restriction set");
            }
            Some(res.mask(g.vertex_count()))
        }
        None => None,
    };
    for s in set.iter() {
        let d = distances_from(g, [s], mask.as_deref(), r);
        if set.iter().any(|t| t != s && d[t] <= r) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Greedy maximal `r`-scattered subset of `set`, scanning in increasing id.
pub fn greedy_maximal_scattered(g: &WeightedGraph, set: &VertexSet, r: f64) -> VertexSet {
    greedy_maximal_scattered_within(g, set, r, None)
}

/// Same as [`greedy_maximal_scattered`] with distances taken in `G[mask]`.
/// `r = 0` is allowed and keeps one vertex per zero-distance class.
pub fn greedy_maximal_scattered_within(
    g: &WeightedGraph,
    set: &VertexSet,
    r: f64,
    mask: Option<&[bool]>,
) -> VertexSet {
    let mut covered = vec![false; g.vertex_count()];
    let mut chosen = Vec::new();
    for a in set.iter() {
        if covered[a] {
            continue;
        }
        chosen.push(a);
        let d = distances_from(g, [a], mask, r);
        for (v, dv) in d.iter().enumerate() {
            if *dv <= r {
                covered[v] = true;
            }
        }
    }
    VertexSet(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(weights: &[f64]) -> WeightedGraph {
        WeightedGraph::from_edges(
            weights.len() + 1,
            weights.iter().enumerate().map(|(i, &w)| (i, i + 1, w)),
        )
        .unwrap()
    }

    fn cycle4() -> WeightedGraph {
        WeightedGraph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap()
    }

    fn vs(v: &[usize]) -> VertexSet {
        VertexSet::new(v.to_vec())
    }

    #[test]
    fn sssp_single_multi_and_restricted() {
        let g = path(&[1.0, 2.0]);
        let d = sssp_distances(&g, &vs(&[0]), None).unwrap();
        assert_eq!(d.as_slice(), &[0.0, 1.0, 3.0]);
        let d = sssp_distances(&g, &vs(&[0, 2]), None).unwrap();
        assert_eq!(d.as_slice(), &[0.0, 1.0, 0.0]);
        let d = sssp_distances(&g, &vs(&[0]), Some(&vs(&[0, 2]))).unwrap();
        assert_eq!(d.get(0), 0.0);
        assert!(d.get(2).is_infinite());
    }

    #[test]
    fn sssp_rejects_bad_input() {
        let g = path(&[1.0]);
        assert!(matches!(
            sssp_distances(&g, &VertexSet::default(), None),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            sssp_distances(&g, &vs(&[5]), None),
            Err(Error::VertexOutOfRange { vertex: 5, .. })
        ));
        assert!(sssp_distances(&g, &vs(&[0]), Some(&vs(&[1]))).is_err());
    }

    #[test]
    fn structural_edges_carry_no_distance() {
        let g = WeightedGraph::from_edges(2, [(0, 1, f64::INFINITY)]).unwrap();
        assert!(g.has_edge(0, 1));
        let d = sssp_distances(&g, &vs(&[0]), None).unwrap();
        assert!(d.get(1).is_infinite());
    }

    #[test]
    fn graph_rejects_loops_parallel_and_negative() {
        let mut g = WeightedGraph::new(3);
        assert!(g.add_edge(0, 0, 1.0).is_err());
        assert!(g.add_edge(0, 1, -1.0).is_err());
        assert!(g.add_edge(0, 1, f64::NAN).is_err());
        g.add_edge(0, 1, 1.0).unwrap();
        assert!(g.add_edge(1, 0, 2.0).is_err());
    }

    #[test]
    fn diameters_on_the_four_cycle() {
        let g = cycle4();
        assert_eq!(set_diameter(&g, &vs(&[0, 2]), DiameterMode::Weak).unwrap(), 2.0);
        assert!(set_diameter(&g, &vs(&[0, 2]), DiameterMode::Strong)
            .unwrap()
            .is_infinite());
        for mode in [DiameterMode::Weak, DiameterMode::Strong] {
            assert_eq!(set_diameter(&g, &vs(&[0]), mode).unwrap(), 0.0);
        }
        assert!(set_diameter(&g, &VertexSet::default(), DiameterMode::Weak).is_err());
    }

    #[test]
    fn scattered_checks() {
        let g = path(&[1.0, 1.0]);
        assert!(is_scattered(&g, &vs(&[0, 2]), 1.0, None).unwrap());
        assert!(!is_scattered(&g, &vs(&[0, 1]), 1.0, None).unwrap());
        assert!(is_scattered(&g, &vs(&[0, 2]), 1.0, Some(&vs(&[0, 2]))).unwrap());
    }

    #[test]
    fn greedy_scattered_examples() {
        let g = path(&[1.0, 1.0]);
        assert_eq!(greedy_maximal_scattered(&g, &vs(&[0, 1, 2]), 1.0), vs(&[0, 2]));
        assert_eq!(greedy_maximal_scattered(&g, &vs(&[0, 1, 2]), 0.5), vs(&[0, 1, 2]));
        // star: centre 0, leaves 1..=4
        let star = WeightedGraph::from_edges(5, (1..5).map(|l| (0, l, 1.0))).unwrap();
        assert_eq!(greedy_maximal_scattered(&star, &vs(&[1, 2, 3, 4]), 2.0), vs(&[1]));
    }

    #[test]
    fn labelled_search_prefers_lower_label_on_ties() {
        let g = path(&[1.0, 1.0]);
        let s = labelled_search(&g, [(2, 0), (0, 1)], None, f64::INFINITY);
        assert_eq!(s.label, vec![1, 0, 0]);
        assert_eq!(s.dist, vec![0.0, 1.0, 0.0]);
    }
}
