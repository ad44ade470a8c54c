//! Solvers for repairing stable-matching instances by preference swaps.
//!
//! An instance is a bipartite graph with a strict preference list and a
//! capacity per vertex. The smallest possible perturbation is a swap: one
//! adjacent transposition inside one list. This crate computes, exactly:
//!
//! - the minimum number of swaps (and a witnessing sequence) that makes a
//!   given subgraph stable, in polynomial time via a reduction to
//!   submodular function minimization ([`repair`]);
//! - the swap distance to an instance admitting a perfect stable matching,
//!   at desk scale, by two independent exponential searches ([`psm`]).
//!
//! Supporting modules: the instance model and its position-expanded view
//! ([`instance`]), blocking-edge detection and deferred acceptance
//! ([`stability`]), generic submodular minimization ([`sfm`]), and instance
//! generators ([`gen`]).

pub mod gen;
pub mod instance;
pub mod psm;
pub mod repair;
pub mod sfm;
pub mod stability;

pub use instance::{
    Edge, EdgeSet, ExtEdge, ExtendedGraph, Instance, Side, Subgraph, Swap, SwapError,
    SwapSequence, ValidationReport, Violation,
};
pub use psm::{MatchingTarget, PsmError, PsmResult, PsmStats};
pub use repair::{
    BlockingAnalysis, GroupColoring, RepairError, RepairMethod, RepairResult,
};
pub use stability::{BlockReason, StabilityReport};
