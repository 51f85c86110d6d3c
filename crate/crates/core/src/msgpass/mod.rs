//! Interior-point iterations computed by the agents of a clique tree.
//!
//! Each agent owns one subproblem. A search direction costs one upward pass
//! of quadratic messages (the agent's local reduced QP with its residual
//! coordinates eliminated, expressed on the coordinates it shares with its
//! parent) and one downward pass of separator values. Step sizes and the
//! perturbation/stopping test are tree reductions, so an iteration is three
//! upward-downward passes.
//!
//! Messages are `½ ΔᵀHΔ + hᵀΔ`; the constant is not sent. In the downward
//! pass a child fixes its separator to the parent's values and
//! back-substitutes through the factorization it kept from the upward pass.

mod comm;
mod message;
mod reduce;
mod solver;
mod tree;

pub use comm::{CommLog, CommRecord, Pass};
pub use message::{fold_messages, solve_tree_qp, upward_message, Elimination, QuadraticMessage, TreeQpSolution};
pub use reduce::{reduce_step_sizes, reduce_termination, PassTraffic, TerminationInput, TerminationTotals};
pub use solver::{solve_distributed, solve_distributed_observed, DistributedSolution, IterationView};
pub use tree::{build_agent_tree, AgentNode, AgentTree};
