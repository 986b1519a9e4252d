//! Shared inputs for the benchmarks.

use birsym_core::relations::{build_relations, full_kset, RelationSystem};
use birsym_core::{AbelianGroup, Flavor};

/// Full relation system for a cyclic group.
pub fn cyclic_system(order: u32, n: usize, flavor: Flavor) -> RelationSystem {
    let g = AbelianGroup::cyclic(order).expect("valid order");
    build_relations(&g, n, flavor, &full_kset(n)).expect("relations build")
}

/// Benchmark grid: `(order, n)` pairs of increasing size.
pub const SIZES: [(u32, usize); 4] = [(29, 2), (13, 3), (19, 3), (11, 4)];
