//! Ground truth for small instances: exact optima, a greedy adversary and
//! seeded instance families.

mod adversary;
mod exact;
mod generate;

pub use adversary::{greedy_adversary_step, new_edge_count, CostedPair};
pub(crate) use adversary::{most_costly, selected_path};
pub use exact::{min_preserver, preserves, EXHAUSTIVE_EDGE_LIMIT};
pub use generate::{generate, Instance, InstanceFamily, SharedSide};
