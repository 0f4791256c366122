//! Metric sparsity toolbox.
//!
//! Weak coloring numbers of ordered vertex partitions in edge-weighted
//! graphs, the partitions built from buffered cop decompositions and from
//! tree decompositions, sparse covers, flatness extraction, epsilon-ladders
//! with their bound evaluators, a recursive lower-bound instance family and
//! a k-Center coreset builder. Every construction ships with a checker that
//! does not share its code path.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
pub mod bounds;
pub mod coreset;
pub mod cover;
pub mod decomposition;
pub mod error;
pub mod flatness;
pub mod generate;
pub mod graph;
pub mod io;
pub mod ladder;
pub mod lowerbound;
pub mod partition;
pub mod wcol;

pub use error::{Error, Result};
pub use graph::{DiameterMode, DistanceMap, VertexSet, WeightedGraph};
pub use partition::OrderedPartition;
