use serde::Serialize;

use super::RootedTree;
use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};

/// A tree decomposition: bags on nodes `0..bags.len()`, tree edges and a root.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeDecomposition {
    pub bags: Vec<VertexSet>,
    pub edges: Vec<(usize, usize)>,
    pub root: usize,
}

impl TreeDecomposition {
    pub fn new(bags: Vec<VertexSet>, edges: Vec<(usize, usize)>, root: usize) -> Self {
        TreeDecomposition { bags, edges, root }
    }

    pub fn node_count(&self) -> usize {
        self.bags.len()
    }

    pub fn max_bag_size(&self) -> usize {
        self.bags.iter().map(VertexSet::len).max().unwrap_or(0)
    }

    /// `max bag size - 1`; an empty decomposition has width 0.
    pub fn width(&self) -> usize {
        self.max_bag_size().saturating_sub(1)
    }

    pub fn rooted(&self) -> Result<RootedTree> {
        RootedTree::from_edges(self.bags.len(), &self.edges, self.root)
            .map_err(Error::InvalidDecomposition)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TdViolation {
    Structure { detail: String },
    VertexOutOfRange { node: usize, vertex: usize },
    VertexMissing { vertex: usize },
    VertexDisconnected { vertex: usize },
    EdgeUncovered { u: usize, v: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TdReport {
    pub valid: bool,
    pub width: Option<usize>,
    pub violations: Vec<TdViolation>,
}

/// Checks the tree shape, vertex connectivity and edge coverage.
/// Structural edges (weight `+inf`) must be covered as well.
pub fn validate_tree_decomposition(g: &WeightedGraph, td: &TreeDecomposition) -> TdReport {
    let n = g.vertex_count();
    let mut violations = Vec::new();
    let tree_ok = match td.rooted() {
        Ok(_) => true,
        Err(e) => {
            violations.push(TdViolation::Structure {
                detail: e.to_string(),
            });
            false
        }
    };
    let mut nodes_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (node, bag) in td.bags.iter().enumerate() {
        for v in bag.iter() {
            if v >= n {
                violations.push(TdViolation::VertexOutOfRange { node, vertex: v });
            } else {
                nodes_of[v].push(node);
            }
        }
    }
    for (v, nodes) in nodes_of.iter().enumerate() {
        if nodes.is_empty() {
            violations.push(TdViolation::VertexMissing { vertex: v });
        }
    }
    if tree_ok {
        // In a tree, the nodes holding v are connected iff they induce
        // exactly |nodes| - 1 tree edges.
        let mut induced = vec![0usize; n];
        for &(a, b) in &td.edges {
            let (ba, bb) = (&td.bags[a], &td.bags[b]);
            for v in ba.iter() {
                if v < n && bb.contains(v) {
                    induced[v] += 1;
                }
            }
        }
        for v in 0..n {
            if !nodes_of[v].is_empty() && induced[v] + 1 != nodes_of[v].len() {
                violations.push(TdViolation::VertexDisconnected { vertex: v });
            }
        }
    }
    for e in g.edges() {
        let (a, b) = (&nodes_of[e.u], &nodes_of[e.v]);
        if !sorted_intersect(a, b) {
            violations.push(TdViolation::EdgeUncovered { u: e.u, v: e.v });
        }
    }
    let valid = violations.is_empty();
    TdReport {
        valid,
        width: valid.then(|| td.width()),
        violations,
    }
}

fn sorted_intersect(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(v: &[usize]) -> VertexSet {
        VertexSet::new(v.to_vec())
    }

    #[test]
    fn triangle_single_bag() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let td = TreeDecomposition::new(vec![vs(&[0, 1, 2])], vec![], 0);
        let rep = validate_tree_decomposition(&g, &td);
        assert!(rep.valid);
        assert_eq!(rep.width, Some(2));
    }

    #[test]
    fn path_two_bags_and_uncovered_chord() {
        let mut g = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let td = TreeDecomposition::new(vec![vs(&[0, 1]), vs(&[1, 2])], vec![(0, 1)], 0);
        let rep = validate_tree_decomposition(&g, &td);
        assert!(rep.valid);
        assert_eq!(rep.width, Some(1));
        g.add_edge(0, 2, 1.0).unwrap();
        let rep = validate_tree_decomposition(&g, &td);
        assert!(!rep.valid);
        assert_eq!(rep.width, None);
        assert_eq!(rep.violations, vec![TdViolation::EdgeUncovered { u: 0, v: 2 }]);
    }

    #[test]
    fn disconnected_occurrence_and_bad_tree() {
        let g = WeightedGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let td = TreeDecomposition::new(
            vec![vs(&[0, 1]), vs(&[1, 2]), vs(&[0])],
            vec![(0, 1), (1, 2)],
            0,
        );
        let rep = validate_tree_decomposition(&g, &td);
        assert_eq!(rep.violations, vec![TdViolation::VertexDisconnected { vertex: 0 }]);
        let td = TreeDecomposition::new(vec![vs(&[0, 1]), vs(&[1, 2])], vec![], 0);
        let rep = validate_tree_decomposition(&g, &td);
        assert!(matches!(rep.violations[0], TdViolation::Structure { .. }));
    }

    #[test]
    fn missing_vertex() {
        let g = WeightedGraph::new(2);
        let td = TreeDecomposition::new(vec![vs(&[0])], vec![], 0);
        let rep = validate_tree_decomposition(&g, &td);
        assert_eq!(rep.violations, vec![TdViolation::VertexMissing { vertex: 1 }]);
    }
}
