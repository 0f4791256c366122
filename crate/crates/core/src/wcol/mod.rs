//! Weak coloring numbers of ordered partitions and the two partition
//! constructions (from buffered cop decompositions and from tree
//! decompositions).

mod cop_partition;
mod reach;
mod td_partition;

pub use cop_partition::{partition_from_cop_decomposition, CopPartition};
pub(crate) use reach::weak_reach_excluding;
pub use reach::{weak_reach_table, WReachTable};
pub use td_partition::partition_from_tree_decomposition;
