//! Primal-dual interior-point method for the coupled SDP, with the search
//! direction computed from the global reduced system. Per-agent kernels
//! here are shared with the message-passing solver.
//!
//! Sign conventions: iterates keep `D y < g`, so `E = diag(D y − g)` is
//! negative and the `y` Hessian `−Dᵀ E⁻¹ Λ D` is positive semidefinite.
//! Reduced QPs are written `min ½ wᵀ P w + qᵀ w  s.t.  C w = rhs`.

mod kkt;
mod options;
mod solver;
mod state;

pub use kkt::{
    agent_feasibility, agent_qp, agent_qps, agent_residuals, agent_scaling, assemble_global_qp, compute_residuals,
    compute_scalings, feasibility_norms, recover_agent_direction, solve_kkt_centralized, solve_saddle_point, solve_saddle_point_ordered,
    verify_direction, AgentResiduals, LocalQp, ResidualNorms, Residuals,
};
pub use options::SolverOptions;
pub(crate) use solver::{finish, trace_row};
pub use solver::{
    agent_step_bounds, apply_agent_step, apply_step, should_stop, solve_centralized, step_from_bound, step_sizes,
    update_perturbation, Solution, Status, StepBounds, TraceRow,
};
pub use state::{
    agent_complementarity, duality_measure, initial_iterate, AgentDirection, AgentIterate, IterateState,
    SearchDirection,
};
pub(crate) use state::initial_agent_iterate;
