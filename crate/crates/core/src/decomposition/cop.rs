use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use super::tree::{validate_tree_decomposition, TdViolation, TreeDecomposition};
use super::RootedTree;
use crate::error::{invalid, Error, Result};
use crate::graph::{distances_from, labelled_search, VertexSet, WeightedGraph};

const NONE: usize = usize::MAX;

/// `(V_eta, T_eta)`: a vertex set with a rooted skeleton tree inside it.
/// An artificial root joining several components has no vertices and no root.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Supernode {
    pub id: usize,
    pub vertices: VertexSet,
    pub root: Option<usize>,
    pub skeleton: Vec<(usize, usize)>,
}

impl Supernode {
    /// Root plus all skeleton endpoints.
    pub fn skeleton_vertices(&self) -> VertexSet {
        self.root
            .into_iter()
            .chain(self.skeleton.iter().flat_map(|&(a, b)| [a, b]))
            .collect()
    }
}

/// Supernodes arranged in a rooted partition tree; `parent` holds indices
/// into `supernodes`.
#[derive(Debug, Clone)]
pub struct BufferedCopDecomposition {
    supernodes: Vec<Supernode>,
    parent: Vec<Option<usize>>,
    tree: RootedTree,
}

impl BufferedCopDecomposition {
    pub fn new(supernodes: Vec<Supernode>, parent: Vec<Option<usize>>) -> Result<Self> {
        if supernodes.len() != parent.len() {
            return invalid("one parent entry per supernode is required");
        }
        let mut ids = HashSet::new();
        for s in &supernodes {
            if !ids.insert(s.id) {
                return Err(Error::InvalidDecomposition(format!(
                    "duplicate supernode id {}",
                    s.id
                )));
            }
        }
        let tree = RootedTree::from_parent_array(&parent).map_err(Error::InvalidDecomposition)?;
        Ok(BufferedCopDecomposition {
            supernodes,
            parent,
            tree,
        })
    }

    pub fn supernodes(&self) -> &[Supernode] {
        &self.supernodes
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    pub fn len(&self) -> usize {
        self.supernodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supernodes.is_empty()
    }

    /// Index of the supernode owning each vertex (`usize::MAX` if none).
    pub fn owners(&self, n: usize) -> Vec<usize> {
        let mut owner = vec![NONE; n];
        for (i, s) in self.supernodes.iter().enumerate() {
            for v in s.vertices.iter() {
                if v < n {
                    owner[v] = i;
                }
            }
        }
        owner
    }

    /// Union of the vertex sets in the subtree of supernode `i`.
    pub fn dom(&self, i: usize) -> VertexSet {
        self.tree
            .subtree(i)
            .into_iter()
            .flat_map(|j| self.supernodes[j].vertices.iter())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CopParams {
    pub delta: f64,
    pub gamma: f64,
    pub w: usize,
    /// Slack applied to every numeric comparison.
    pub tolerance: f64,
}

impl CopParams {
    pub fn new(delta: f64, gamma: f64, w: usize) -> Self {
        CopParams {
            delta,
            gamma,
            w,
            tolerance: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BcdViolation {
    Structure { detail: String },
    Partition { vertex: usize, detail: String },
    Radius { supernode: usize, vertex: usize, distance: f64 },
    SkeletonShape { supernode: usize, detail: String },
    SkeletonNotShortest {
        supernode: usize,
        vertex: usize,
        skeleton_distance: f64,
        distance: f64,
    },
    TooManyLeaves { supernode: usize, leaves: usize },
    Buffer { supernode: usize, ancestor: usize, distance: f64 },
    TooManyAdjacentAncestors { supernode: usize, count: usize },
    TreeDecomposition { violation: TdViolation },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BcdReport {
    pub valid: bool,
    pub violations: Vec<BcdViolation>,
    /// Largest `dist_{G[V_eta]}(T_eta, v)`.
    pub max_radius: f64,
    pub max_leaves: usize,
    pub max_adjacent_ancestors: usize,
    /// Smallest distance between a supernode and a non-adjacent proper
    /// ancestor; the buffer property holds for every gamma below it.
    pub gamma_sup: f64,
}

/// Checks radius, shortest-path skeleton, buffer and tree-decomposition
/// properties literally, reporting a witness for every failure.
pub fn validate_buffered_cop_decomposition(
    g: &WeightedGraph,
    bcd: &BufferedCopDecomposition,
    params: &CopParams,
) -> BcdReport {
    let n = g.vertex_count();
    let mut violations = structural_violations(g, bcd);
    if !violations.is_empty() {
        return BcdReport {
            valid: false,
            violations,
            max_radius: f64::NAN,
            max_leaves: 0,
            max_adjacent_ancestors: 0,
            gamma_sup: f64::NAN,
        };
    }
    let owner = bcd.owners(n);
    let sn = bcd.supernodes();
    let tree = bcd.tree();
    let tol = params.tolerance;

    let mut adjacent: HashSet<(usize, usize)> = HashSet::new();
    for e in g.edges() {
        let (a, b) = (owner[e.u], owner[e.v]);
        if a != b {
            adjacent.insert((a.min(b), a.max(b)));
        }
    }
    let is_adjacent = |a: usize, b: usize| adjacent.contains(&(a.min(b), a.max(b)));

    struct Local {
        violations: Vec<BcdViolation>,
        radius: f64,
        leaves: usize,
    }
    let locals: Vec<Local> = (0..sn.len())
        .into_par_iter()
        .map(|i| {
            let s = &sn[i];
            let mut out = Local {
                violations: Vec::new(),
                radius: 0.0,
                leaves: 0,
            };
            let Some(root) = s.root else {
                return out;
            };
            let own = s.vertices.mask(n);
            let skel = s.skeleton_vertices();
            let d = distances_from(g, skel.iter(), Some(&own), f64::INFINITY);
            for v in s.vertices.iter() {
                out.radius = out.radius.max(d[v]);
                if d[v] > params.delta + tol {
                    out.violations.push(BcdViolation::Radius {
                        supernode: s.id,
                        vertex: v,
                        distance: d[v],
                    });
                }
            }
            match skeleton_depths(g, s, n) {
                Err(detail) => out.violations.push(BcdViolation::SkeletonShape {
                    supernode: s.id,
                    detail,
                }),
                Ok((tree_dist, degree)) => {
                    let dom = bcd.dom(i).mask(n);
                    let true_dist = distances_from(g, [root], Some(&dom), f64::INFINITY);
                    for v in skel.iter() {
                        if (tree_dist[v] - true_dist[v]).abs() > tol
                            && tree_dist[v] != true_dist[v]
                        {
                            out.violations.push(BcdViolation::SkeletonNotShortest {
                                supernode: s.id,
                                vertex: v,
                                skeleton_distance: tree_dist[v],
                                distance: true_dist[v],
                            });
                        }
                    }
                    out.leaves = skel.iter().filter(|&v| v != root && degree[v] == 1).count();
                    if out.leaves > params.w {
                        out.violations.push(BcdViolation::TooManyLeaves {
                            supernode: s.id,
                            leaves: out.leaves,
                        });
                    }
                }
            }
            out
        })
        .collect();

    // Buffer: one search per ancestor zeta, read off at every descendant.
    let buffers: Vec<(Vec<BcdViolation>, f64)> = (0..sn.len())
        .into_par_iter()
        .map(|z| {
            let mut found = Vec::new();
            let mut gamma_sup = f64::INFINITY;
            if sn[z].vertices.is_empty() {
                return (found, gamma_sup);
            }
            let below = tree.subtree(z);
            if below.len() == 1 {
                return (found, gamma_sup);
            }
            let dom = bcd.dom(z).mask(n);
            let d = distances_from(g, sn[z].vertices.iter(), Some(&dom), f64::INFINITY);
            for &e in &below[1..] {
                if sn[e].vertices.is_empty() || is_adjacent(e, z) {
                    continue;
                }
                let dist = sn[e].vertices.iter().map(|v| d[v]).fold(f64::INFINITY, f64::min);
                gamma_sup = gamma_sup.min(dist);
                if dist <= params.gamma - tol {
                    found.push(BcdViolation::Buffer {
                        supernode: sn[e].id,
                        ancestor: sn[z].id,
                        distance: dist,
                    });
                }
            }
            (found, gamma_sup)
        })
        .collect();

    let mut bags = Vec::with_capacity(sn.len());
    let mut max_adjacent = 0;
    for i in 0..sn.len() {
        let chain = tree.path_from_root(i);
        let a: Vec<usize> = chain
            .into_iter()
            .filter(|&z| z == i || (!sn[z].vertices.is_empty() && is_adjacent(i, z)))
            .collect();
        max_adjacent = max_adjacent.max(a.len());
        if a.len() > params.w {
            violations.push(BcdViolation::TooManyAdjacentAncestors {
                supernode: sn[i].id,
                count: a.len(),
            });
        }
        bags.push(a.iter().flat_map(|&z| sn[z].vertices.iter()).collect());
    }
    let edges: Vec<(usize, usize)> = (0..sn.len())
        .filter_map(|i| bcd.parent(i).map(|p| (p, i)))
        .collect();
    let td = TreeDecomposition::new(bags, edges, tree.root);
    for violation in validate_tree_decomposition(g, &td).violations {
        violations.push(BcdViolation::TreeDecomposition { violation });
    }

    let mut max_radius: f64 = 0.0;
    let mut max_leaves = 0;
    let mut report_violations = Vec::new();
    for l in locals {
        max_radius = max_radius.max(l.radius);
        max_leaves = max_leaves.max(l.leaves);
        report_violations.extend(l.violations);
    }
    let mut gamma_sup = f64::INFINITY;
    for (found, gs) in buffers {
        gamma_sup = gamma_sup.min(gs);
        report_violations.extend(found);
    }
    report_violations.extend(violations);
    BcdReport {
        valid: report_violations.is_empty(),
        violations: report_violations,
        max_radius,
        max_leaves,
        max_adjacent_ancestors: max_adjacent,
        gamma_sup,
    }
}

fn structural_violations(g: &WeightedGraph, bcd: &BufferedCopDecomposition) -> Vec<BcdViolation> {
    let n = g.vertex_count();
    let mut out = Vec::new();
    let mut owner = vec![NONE; n];
    for s in bcd.supernodes() {
        for v in s.vertices.iter() {
            if v >= n {
                out.push(BcdViolation::Structure {
                    detail: format!("supernode {} holds out-of-range vertex {v}", s.id),
                });
                continue;
            }
            if owner[v] != NONE {
                out.push(BcdViolation::Partition {
                    vertex: v,
                    detail: format!("in supernodes {} and {}", owner[v], s.id),
                });
            }
            owner[v] = s.id;
        }
        match s.root {
            None if !s.vertices.is_empty() => out.push(BcdViolation::Structure {
                detail: format!("supernode {} has vertices but no skeleton root", s.id),
            }),
            None if !s.skeleton.is_empty() => out.push(BcdViolation::Structure {
                detail: format!("supernode {} has skeleton edges but no root", s.id),
            }),
            Some(r) if !s.vertices.contains(r) => out.push(BcdViolation::Structure {
                detail: format!("skeleton root of supernode {} lies outside it", s.id),
            }),
            _ => {}
        }
        for &(a, b) in &s.skeleton {
            if !s.vertices.contains(a) || !s.vertices.contains(b) {
                out.push(BcdViolation::Structure {
                    detail: format!("skeleton edge {a}-{b} leaves supernode {}", s.id),
                });
            }
        }
    }
    for (v, &o) in owner.iter().enumerate() {
        if o == NONE {
            out.push(BcdViolation::Partition {
                vertex: v,
                detail: "not in any supernode".into(),
            });
        }
    }
    out
}

/// Distances from the root along the skeleton and skeleton degrees; fails
/// unless the skeleton is a tree of finite-weight graph edges.
fn skeleton_depths(
    g: &WeightedGraph,
    s: &Supernode,
    n: usize,
) -> std::result::Result<(Vec<f64>, Vec<usize>), String> {
    let root = s.root.expect("checked by caller");
    let verts = s.skeleton_vertices();
    if s.skeleton.len() + 1 != verts.len() {
        return Err(format!(
            "{} skeleton edges on {} vertices",
            s.skeleton.len(),
            verts.len()
        ));
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut degree = vec![0; n];
    for &(a, b) in &s.skeleton {
        match g.weight(a, b) {
            Some(w) if w.is_finite() => {
                adj[a].push((b, w));
                adj[b].push((a, w));
                degree[a] += 1;
                degree[b] += 1;
            }
            _ => return Err(format!("{a}-{b} is not a finite-weight edge of G")),
        }
    }
    let mut dist = vec![f64::INFINITY; n];
    dist[root] = 0.0;
    let mut stack = vec![root];
    let mut reached = 1;
    while let Some(u) = stack.pop() {
        for &(w, wt) in &adj[u] {
            if dist[w].is_infinite() {
                dist[w] = dist[u] + wt;
                reached += 1;
                stack.push(w);
            }
        }
    }
    if reached != verts.len() {
        return Err("skeleton is not connected".into());
    }
    Ok((dist, degree))
}

/// What a heuristic decomposition achieved, next to the `(D, D/h, h-1)`
/// target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CopAchieved {
    pub delta: f64,
    /// Supremum of valid buffers: every gamma strictly below validates.
    pub gamma: f64,
    pub w: usize,
    pub target_delta: f64,
    pub target_gamma: f64,
    pub target_w: usize,
    pub target_met: bool,
    pub report: BcdReport,
}

/// Recursive peeling: each remaining component gets a skeleton of
/// shortest paths from its root toward every adjacent ancestor (or toward
/// its farthest vertex when there is none), `V_eta` is the radius-`delta`
/// ball around it, and the leftover components become children.
/// Disconnected graphs hang under an empty artificial root.
pub fn heuristic_cop_decomposition(
    g: &WeightedGraph,
    delta: f64,
    h: usize,
) -> Result<(BufferedCopDecomposition, CopAchieved)> {
    if !(delta > 0.0) || !delta.is_finite() {
        return invalid(format!("delta must be positive and finite, got {delta}"));
    }
    if h < 2 {
        return invalid(format!("h must be at least 2, got {h}"));
    }
    let n = g.vertex_count();
    let mut supernodes: Vec<Supernode> = Vec::new();
    let mut parent: Vec<Option<usize>> = Vec::new();
    let mut owner = vec![NONE; n];

    let comps = g.components(None);
    let mut stack: Vec<(VertexSet, Option<usize>)> = Vec::new();
    if comps.len() != 1 {
        supernodes.push(Supernode {
            id: 1,
            vertices: VertexSet::new(Vec::new()),
            root: None,
            skeleton: Vec::new(),
        });
        parent.push(None);
        stack.extend(comps.into_iter().rev().map(|c| (c, Some(0))));
    } else {
        stack.extend(comps.into_iter().map(|c| (c, None)));
    }

    let mut in_chain = vec![false; 0];
    while let Some((comp, par)) = stack.pop() {
        let chain = {
            let mut c = Vec::new();
            let mut cur = par;
            while let Some(p) = cur {
                c.push(p);
                cur = parent[p];
            }
            c.reverse();
            c
        };
        in_chain.clear();
        in_chain.resize(supernodes.len(), false);
        for &z in &chain {
            in_chain[z] = true;
        }
        let mask = comp.mask(n);
        // touches[z] = vertices of comp adjacent to supernode z.
        let mut touches: Vec<Vec<usize>> = vec![Vec::new(); supernodes.len()];
        for v in comp.iter() {
            for &(w, _) in g.neighbors(v) {
                let o = owner[w];
                if !mask[w] && o != NONE && in_chain[o] && touches[o].last() != Some(&v) {
                    touches[o].push(v);
                }
            }
        }
        let adjacent: Vec<usize> = chain.iter().copied().filter(|&z| !touches[z].is_empty()).collect();
        let root = match adjacent.last() {
            Some(&z) => *touches[z].iter().min().expect("nonempty"),
            None => comp.as_slice()[0],
        };
        let search = labelled_search(g, [(root, 0)], Some(&mask), f64::INFINITY);
        let nearest = |cands: &[usize]| {
            cands
                .iter()
                .copied()
                .min_by(|&a, &b| search.dist[a].total_cmp(&search.dist[b]).then(a.cmp(&b)))
        };
        let targets: Vec<usize> = if adjacent.is_empty() {
            comp.iter()
                .min_by(|&a, &b| search.dist[b].total_cmp(&search.dist[a]).then(a.cmp(&b)))
                .into_iter()
                .collect()
        } else {
            adjacent.iter().filter_map(|&z| nearest(&touches[z])).collect()
        };
        let mut in_skel = vec![false; n];
        in_skel[root] = true;
        let mut skeleton = Vec::new();
        for t in targets {
            let mut cur = t;
            while !in_skel[cur] {
                in_skel[cur] = true;
                let p = search.parent[cur].expect("component is connected");
                skeleton.push((p.min(cur), p.max(cur)));
                cur = p;
            }
        }
        skeleton.sort_unstable();
        let skel_vertices: Vec<usize> = (0..n).filter(|&v| in_skel[v]).collect();
        let ball = distances_from(g, skel_vertices, Some(&mask), delta);
        let vertices: VertexSet = comp.iter().filter(|&v| ball[v] <= delta).collect();
        let idx = supernodes.len();
        for v in vertices.iter() {
            owner[v] = idx;
        }
        let mut rest = mask;
        for v in vertices.iter() {
            rest[v] = false;
        }
        supernodes.push(Supernode {
            id: idx + 1,
            vertices,
            root: Some(root),
            skeleton,
        });
        parent.push(par);
        let children = g.components(Some(&rest));
        stack.extend(children.into_iter().rev().map(|c| (c, Some(idx))));
    }

    let bcd = BufferedCopDecomposition::new(supernodes, parent)?;
    let target_gamma = delta / h as f64;
    let probe = CopParams::new(delta, 0.0, usize::MAX);
    let report = validate_buffered_cop_decomposition(g, &bcd, &probe);
    let w = report.max_leaves.max(report.max_adjacent_ancestors).max(1);
    let final_params = CopParams::new(delta, 0.0, w);
    let report = validate_buffered_cop_decomposition(g, &bcd, &final_params);
    let achieved = CopAchieved {
        delta: report.max_radius,
        gamma: report.gamma_sup,
        w,
        target_delta: delta,
        target_gamma,
        target_w: h - 1,
        target_met: report.valid && report.gamma_sup > target_gamma && w < h,
        report,
    };
    Ok((bcd, achieved))
}
