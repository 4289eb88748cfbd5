//! Comparison solvers: nearest-first greedy, merge-and-split, and NSGA-II.

mod distance;
mod merge_split;
mod nsga2;

pub use distance::distance_based;
pub use merge_split::{
    merge_and_split, merge_and_split_from, nearest_task_partition, MergeSplitConfig,
    MergeSplitOutcome, TaskCoalition,
};
pub use nsga2::{
    crowding_distance, dominates, fast_non_dominated_sort, non_dominated_sort_by, nsga2_run,
    Nsga2Config, Nsga2Result, ParetoEntry, ParetoFront,
};
