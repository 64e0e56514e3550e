//! Optimal-play oracles: exhaustive enumeration and IDA*.

mod bfs;
mod heuristic;
mod ida;
mod policy;

pub use bfs::{
    bfs_enumerate, pack, unpack, DistanceTable, EnumerationReport, ENUMERATION_CELL_LIMIT,
};
pub use heuristic::manhattan_heuristic;
pub use ida::{ida_star, SolveOutcome, SolveResult, DEFAULT_NODE_BUDGET};
pub use policy::SolverPolicy;
