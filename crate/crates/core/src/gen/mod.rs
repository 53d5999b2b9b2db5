//! Instance generators: CFI graphs over arbitrary base graphs, wall base
//! graphs, one-way switches, logic-gate gadgets, the monotone-circuit
//! reduction, color erasure, and a small exact tree-width oracle used to
//! derive expected values in tests.

mod cfi;
mod erase;
mod gates;
mod mcvp;
mod switch;
mod treewidth;
mod wall;

pub use cfi::{cfi, BaseGraph, CfiOutput, PairEntry, Twist};
pub use erase::erase_colors;
pub use gates::{gate_gadget, GateKind, GateOutput};
pub use mcvp::{mcvp_graph, McvpOutput, MonotoneCircuit, NodeKind};
pub use switch::{one_way_switch, OwsOutput};
pub use treewidth::treewidth_exact;
pub use wall::wall_base;

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("vertex of degree {0} needs an inner class of more than 64 vertices")]
    DegreeTooLarge(usize),
    #[error("graph too large for the exact tree-width oracle: {0} > 12 vertices")]
    TooLarge(usize),
    #[error("invalid circuit: {0}")]
    CircuitInvalid(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
