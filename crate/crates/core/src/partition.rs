use serde::Serialize;

use crate::error::{invalid, Result};
use crate::graph::{VertexSet, WeightedGraph};

/// A partition of `V(G)` into nonempty parts; list position is the order
/// (earlier parts are smaller).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderedPartition {
    parts: Vec<VertexSet>,
    #[serde(skip)]
    part_of: Vec<usize>,
}

impl OrderedPartition {
    /// Checks that `parts` are nonempty, disjoint and cover `0..n`.
    pub fn new(n: usize, parts: Vec<VertexSet>) -> Result<Self> {
        let mut part_of = vec![usize::MAX; n];
        for (i, p) in parts.iter().enumerate() {
            if p.is_empty() {
                return invalid(format!("part {i} is empty"));
            }
            for v in p.iter() {
                if v >= n {
                    return invalid(format!("part {i} contains out-of-range vertex {v}"));
                }
                if part_of[v] != usize::MAX {
                    return invalid(format!(
                        "vertex {v} lies in parts {} and {i}",
                        part_of[v]
                    ));
                }
                part_of[v] = i;
            }
        }
        if let Some(v) = part_of.iter().position(|&p| p == usize::MAX) {
            return invalid(format!("vertex {v} is not covered"));
        }
        Ok(OrderedPartition { parts, part_of })
    }

    pub fn singletons(order: &[usize]) -> Result<Self> {
        Self::new(
            order.len(),
            order.iter().map(|&v| VertexSet::singleton(v)).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn parts(&self) -> &[VertexSet] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &VertexSet {
        &self.parts[i]
    }

    /// Index of the part containing `v`.
    pub fn part_of(&self, v: usize) -> usize {
        self.part_of[v]
    }

    pub fn vertex_count(&self) -> usize {
        self.part_of.len()
    }

    pub fn check_graph(&self, g: &WeightedGraph) -> Result<()> {
        if g.vertex_count() != self.vertex_count() {
            return invalid(format!(
                "partition covers {} vertices but the graph has {}",
                self.vertex_count(),
                g.vertex_count()
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_overlap_gap_and_empty() {
        let vs = |v: &[usize]| VertexSet::new(v.to_vec());
        assert!(OrderedPartition::new(3, vec![vs(&[0, 1]), vs(&[1, 2])]).is_err());
        assert!(OrderedPartition::new(3, vec![vs(&[0, 1])]).is_err());
        assert!(OrderedPartition::new(2, vec![vs(&[0, 1]), vs(&[])]).is_err());
        let p = OrderedPartition::new(3, vec![vs(&[2]), vs(&[0, 1])]).unwrap();
        assert_eq!(p.part_of(0), 1);
        assert_eq!(p.part_of(2), 0);
    }
}
