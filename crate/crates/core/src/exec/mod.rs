//! Query execution.

use serde::Serialize;

use crate::ghd::NodeId;
use crate::value::Attr;

pub mod generic_join;
pub mod ghd_join;
pub mod yannakakis;

pub use generic_join::{generic_join, join_relations, JoinCounters};
pub use ghd_join::{
    aggro_ghd_join, aggro_ghd_join_with_stats, execute_aghd, execute_aghd_with_stats, ghd_join, home_node,
    left_deep_counts, ExecOptions,
};
pub use yannakakis::{aggro_yannakakis, yannakakis, JoinTree};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BagStats {
    pub node: NodeId,
    pub bag: Vec<Attr>,
    /// Tuples fed into the bag join, projections included.
    pub input_tuples: usize,
    pub partial_bindings: usize,
    pub output_tuples: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ExecStats {
    pub bags: Vec<BagStats>,
    /// Tuples dropped by the semijoin reduction.
    pub semijoin_removed: usize,
    /// Sum of intermediate sizes produced while joining up the tree.
    pub join_intermediate: usize,
    pub multiplications: usize,
}

impl ExecStats {
    /// Every tuple materialized or enumerated: bag bindings, bag outputs and
    /// the bottom-up intermediates.
    pub fn intermediate_tuples(&self) -> usize {
        self.bags.iter().map(|b| b.partial_bindings + b.output_tuples).sum::<usize>() + self.join_intermediate
    }
}
