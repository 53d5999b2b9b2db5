//! Weisfeiler-Leman toolkit: higher-order refinement, coherent configurations,
//! permutation-group machinery, identification deciders for graphs with bounded
//! color classes and relational structures with abelian color classes, plus the
//! hard-instance generators the deciders are exercised on.

pub mod coherent;
pub mod gen;
pub mod groups;
pub mod separability;
pub mod structures;
pub mod wl;

/// Largest supported arity and Weisfeiler-Leman dimension. Tuple tables are
/// dense of size `n^k`, so anything beyond 4 is not desk scale.
pub const K_MAX: usize = 4;

pub use coherent::{Configuration, FiberLabel, StarRecord};
pub use groups::{GeneratorSet, Permutation};
pub use separability::{AlgebraicMap, Decision, EliminationTrace, Witness};
pub use structures::{ColorClassReport, RelName, Relation, Structure};
pub use wl::StableColoring;

/// Tunables shared by the engines. Every default matches the documented
/// contract; tests and the CLI may override.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Refuse `n^k` tables whose color table would exceed this many bytes.
    pub memory_cap_bytes: u64,
    /// Hard cap on individualization-refinement search-tree nodes.
    pub search_node_budget: u64,
    /// Seed for sampled verification passes (never affects results, only
    /// which redundant checks run).
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            memory_cap_bytes: 8 * 1024 * 1024 * 1024,
            search_node_budget: 10_000_000,
            seed: 0,
        }
    }
}
