use nalgebra::DVector;

use super::kkt::{compute_residuals, compute_scalings, feasibility_norms, solve_kkt_centralized, ResidualNorms};
use super::options::SolverOptions;
use super::state::{duality_measure, initial_iterate, AgentDirection, AgentIterate, IterateState, SearchDirection};
use crate::error::{Error, Result};
use crate::relaxation::{AgentSubproblem, CoupledSdp};
use crate::scalar::Scalar;
use crate::sdplinalg::max_psd_step;

/// Distance to the boundary along a direction, `None` when unbounded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepBounds<T> {
    pub primal: Option<T>,
    pub dual: Option<T>,
}

fn min_opt<T: Scalar>(a: Option<T>, b: Option<T>) -> Option<T> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl<T: Scalar> StepBounds<T> {
    pub fn unbounded() -> Self {
        StepBounds { primal: None, dual: None }
    }

    pub fn merge(self, other: StepBounds<T>) -> Self {
        StepBounds { primal: min_opt(self.primal, other.primal), dual: min_opt(self.dual, other.dual) }
    }
}

/// One agent's boundary distances: PSD cones and `D y <= g` for the primal
/// step, dual cones and `λ >= 0` for the dual step.
pub fn agent_step_bounds<T: Scalar>(
    a: &AgentSubproblem<T>,
    it: &AgentIterate<T>,
    y_local: &DVector<T>,
    dy_local: &DVector<T>,
    dir: &AgentDirection<T>,
) -> StepBounds<T> {
    let mut out = StepBounds::unbounded();
    for (b, blk) in a.blocks.iter().enumerate() {
        let dx = crate::sdplinalg::smat(&dir.dx.rows(blk.offset, blk.len()).into_owned()).unwrap();
        let dz = crate::sdplinalg::smat(&dir.dz.rows(blk.offset, blk.len()).into_owned()).unwrap();
        out.primal = min_opt(out.primal, max_psd_step(&it.x_block(a, b), &dx));
        out.dual = min_opt(out.dual, max_psd_step(&it.z_block(a, b), &dz));
    }
    let slack = &a.g - &a.d * y_local;
    let rate = &a.d * dy_local;
    for i in 0..a.n_ineq() {
        if rate[i] > T::zero() {
            out.primal = min_opt(out.primal, Some(slack[i] / rate[i]));
        }
        if dir.dlambda[i] < T::zero() {
            out.dual = min_opt(out.dual, Some(-it.lambda[i] / dir.dlambda[i]));
        }
    }
    out
}

/// Fraction-to-boundary rule `t = min(1, γ · bound)`.
pub fn step_from_bound<T: Scalar>(bound: Option<T>, gamma: T) -> T {
    bound.map_or(T::one(), |b| (gamma * b).min(T::one()))
}

/// `(t_p, t_d)` for the whole network.
pub fn step_sizes<T: Scalar>(sdp: &CoupledSdp<T>, state: &IterateState<T>, dir: &SearchDirection<T>, gamma: T) -> (T, T) {
    let mut bounds = StepBounds::unbounded();
    for (k, a) in sdp.agents.iter().enumerate() {
        let b = agent_step_bounds(a, &state.agents[k], &a.gather(&state.y), &a.gather(&dir.dy), &dir.agents[k]);
        bounds = bounds.merge(b);
    }
    (step_from_bound(bounds.primal, gamma), step_from_bound(bounds.dual, gamma))
}

/// Primal variables move by `t_p`, dual variables by `t_d`.
pub fn apply_agent_step<T: Scalar>(it: &mut AgentIterate<T>, dir: &AgentDirection<T>, tp: T, td: T) {
    it.x.axpy(tp, &dir.dx, T::one());
    it.z.axpy(td, &dir.dz, T::one());
    it.v.axpy(td, &dir.dv, T::one());
    it.v_bar.axpy(td, &dir.dv_bar, T::one());
    it.lambda.axpy(td, &dir.dlambda, T::one());
}

pub fn apply_step<T: Scalar>(state: &mut IterateState<T>, dir: &SearchDirection<T>, tp: T, td: T) {
    state.y.axpy(tp, &dir.dy, T::one());
    for (it, d) in state.agents.iter_mut().zip(&dir.agents) {
        apply_agent_step(it, d, tp, td);
    }
}

/// `δ = σ_c μ`.
pub fn update_perturbation<T: Scalar>(sdp: &CoupledSdp<T>, state: &IterateState<T>, sigma_c: T) -> T {
    sigma_c * duality_measure(sdp, state)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
    KktSingular(String),
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIterations => "max-iterations",
            Status::KktSingular(_) => "kkt-singular",
        }
    }

    pub fn is_converged(&self) -> bool {
        *self == Status::Converged
    }
}

/// Per-iteration log entry (values after the update).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub mu: f64,
    pub delta: f64,
    pub r_primal: f64,
    pub r_primal_lin: f64,
    pub r_dual: f64,
    pub r_dual_lin: f64,
    pub t_p: f64,
    pub t_d: f64,
}

/// Final iterate and diagnostics of a solve. Failed runs still carry the
/// last accepted iterate.
#[derive(Clone, Debug)]
pub struct Solution<T: Scalar> {
    pub status: Status,
    pub iterations: usize,
    pub state: IterateState<T>,
    /// Objective including constant offsets.
    pub objective: T,
    pub mu: T,
    pub norms: ResidualNorms<T>,
    pub trace: Vec<TraceRow>,
}

impl<T: Scalar> Solution<T> {
    pub fn y(&self) -> &DVector<T> {
        &self.state.y
    }

    /// `Err` unless converged.
    pub fn into_result(self) -> Result<Self> {
        match &self.status {
            Status::Converged => Ok(self),
            Status::MaxIterations => Err(Error::KktSingular("max-iterations reached".into())),
            Status::KktSingular(d) => Err(Error::KktSingular(d.clone())),
        }
    }
}

/// Stopping test shared by both solvers.
pub fn should_stop<T: Scalar>(norms: &ResidualNorms<T>, mu: T, b_norm: T, opts: &SolverOptions) -> bool {
    norms.max() / (T::one() + b_norm) <= T::lit(opts.eps_feas) && mu <= T::lit(opts.eps_gap)
}

pub(crate) fn trace_row<T: Scalar>(iter: usize, mu: T, delta: T, n: &ResidualNorms<T>, tp: T, td: T) -> TraceRow {
    TraceRow {
        iter,
        mu: mu.as_f64(),
        delta: delta.as_f64(),
        r_primal: n.primal.as_f64(),
        r_primal_lin: n.primal_lin.as_f64(),
        r_dual: n.dual.as_f64(),
        r_dual_lin: n.dual_lin.as_f64(),
        t_p: tp.as_f64(),
        t_d: td.as_f64(),
    }
}

pub(crate) fn starting_point<T: Scalar>(sdp: &CoupledSdp<T>, opts: &SolverOptions) -> IterateState<T> {
    let mut state = initial_iterate(sdp);
    if !opts.center_first {
        state.delta *= T::lit(opts.sigma_c);
    }
    state
}

/// Reference interior-point solve with the global reduced system.
pub fn solve_centralized<T: Scalar>(sdp: &CoupledSdp<T>, opts: &SolverOptions) -> Result<Solution<T>> {
    opts.validate()?;
    let mut state = starting_point(sdp, opts);
    let b_norm = sdp.rhs_norm();
    let gamma = T::lit(opts.gamma);
    let mut trace = Vec::new();
    let mut status = Status::MaxIterations;
    let mut iterations = 0;
    for iter in 1..=opts.max_iters {
        let step = (|| {
            let scal = compute_scalings(sdp, &state)?;
            let res = compute_residuals(sdp, &state, &scal);
            solve_kkt_centralized(sdp, &state, &scal, &res)
        })();
        let dir = match step {
            Ok(d) => d,
            Err(e) => {
                status = Status::KktSingular(format!("iteration {iter}: {e}"));
                break;
            }
        };
        let (tp, td) = step_sizes(sdp, &state, &dir, gamma);
        apply_step(&mut state, &dir, tp, td);
        iterations = iter;
        let mu = duality_measure(sdp, &state);
        state.delta = T::lit(opts.sigma_c) * mu;
        let norms = feasibility_norms(sdp, &state);
        trace.push(trace_row(iter, mu, state.delta, &norms, tp, td));
        if should_stop(&norms, mu, b_norm, opts) {
            status = Status::Converged;
            break;
        }
    }
    Ok(finish(sdp, state, status, iterations, trace))
}

pub(crate) fn finish<T: Scalar>(
    sdp: &CoupledSdp<T>,
    state: IterateState<T>,
    status: Status,
    iterations: usize,
    trace: Vec<TraceRow>,
) -> Solution<T> {
    let xs: Vec<_> = state.agents.iter().map(|a| a.x.clone()).collect();
    let objective = sdp.objective(&state.y, &xs);
    let mu = duality_measure(sdp, &state);
    let norms = feasibility_norms(sdp, &state);
    Solution { status, iterations, state, objective, mu, norms, trace }
}
