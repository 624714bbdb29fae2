//! How phases map vertex programs onto workers.

use crate::engine::EngineConfig;
use crate::graph::Graph;
use crate::partition::{partition, PartitionMap};

#[derive(Clone, Debug)]
pub struct ExecutionSettings {
    pub workers: usize,
    /// Number of label-propagation partitions; defaults to `workers`.
    pub partitions: Option<usize>,
    pub balance_epsilon: f64,
    pub partition_rounds: usize,
    /// Partition every level graph, or reuse the level-0 partition for
    /// coarse levels (coarse vertices keep their sun's ID).
    pub repartition_per_level: bool,
    pub max_supersteps: u64,
    pub shuffle_inboxes: bool,
}

impl Default for ExecutionSettings {
    fn default() -> Self {
        ExecutionSettings {
            workers: 1,
            partitions: None,
            balance_epsilon: 0.05,
            partition_rounds: 30,
            repartition_per_level: true,
            max_supersteps: 1_000_000,
            shuffle_inboxes: false,
        }
    }
}

impl ExecutionSettings {
    pub fn with_workers(workers: usize) -> Self {
        ExecutionSettings { workers, ..ExecutionSettings::default() }
    }

    pub fn partition_count(&self) -> usize {
        self.partitions.unwrap_or(self.workers).max(1)
    }

    /// Partition for `g`. When `inherited` is given and repartitioning is
    /// off, its restriction to `g`'s vertices is used instead.
    pub fn partition_for(&self, g: &Graph, seed: u64, inherited: Option<&PartitionMap>) -> Option<PartitionMap> {
        let parts = self.partition_count();
        if self.workers <= 1 && self.partitions.is_none() {
            return None;
        }
        if let (false, Some(base)) = (self.repartition_per_level, inherited) {
            let assignment = g
                .ids()
                .iter()
                .map(|&id| (id, base.get(id).unwrap_or(id as usize % parts)))
                .collect();
            return Some(PartitionMap::new(assignment, parts));
        }
        Some(partition(g, parts, self.balance_epsilon, self.partition_rounds, seed))
    }

    pub fn engine_config(&self, partition: Option<PartitionMap>, seed: u64) -> EngineConfig {
        EngineConfig {
            num_workers: self.workers.max(1),
            max_supersteps: self.max_supersteps,
            partition,
            seed,
            shuffle_inboxes: self.shuffle_inboxes,
        }
    }
}
