use nalgebra::DVector;

use super::comm::{CommLog, Pass};
use super::message::solve_tree_qp;
use super::reduce::{reduce_step_sizes, reduce_termination, PassTraffic, TerminationInput};
use super::tree::AgentTree;
use crate::error::{Error, Result};
use crate::pdipm::{
    agent_complementarity, agent_feasibility, agent_qp, agent_residuals, agent_scaling, agent_step_bounds,
    apply_agent_step, recover_agent_direction, should_stop, AgentDirection, AgentIterate, IterateState, ResidualNorms,
    SearchDirection, Solution, SolverOptions, Status,
};
use crate::pdipm::{finish, initial_agent_iterate, trace_row};
use crate::relaxation::CoupledSdp;
use crate::scalar::Scalar;

/// What an agent holds between passes: its copy of `y` on `J_k` and its
/// own primal-dual variables.
#[derive(Clone, Debug)]
struct AgentState<T: Scalar> {
    y: DVector<T>,
    it: AgentIterate<T>,
}

/// Read-only view handed to an observer once the direction of an
/// iteration is known, before the step is taken.
pub struct IterationView<'a, T: Scalar> {
    pub iter: usize,
    /// The network iterate assembled from the agents' copies.
    pub state: &'a IterateState<T>,
    pub direction: &'a SearchDirection<T>,
    /// Order of the matrix factorized by each agent.
    pub factor_orders: &'a [usize],
}

/// Outcome of a distributed solve.
#[derive(Clone, Debug)]
pub struct DistributedSolution<T: Scalar> {
    pub solution: Solution<T>,
    pub comm: CommLog,
    /// Order of the matrix each agent factorized in the last direction pass.
    pub factor_orders: Vec<usize>,
}

fn assemble<T: Scalar>(sdp: &CoupledSdp<T>, agents: &[AgentState<T>], delta: T) -> IterateState<T> {
    let mut y = DVector::zeros(sdp.n_y());
    for (a, st) in sdp.agents.iter().zip(agents) {
        for (l, &g) in a.support.iter().enumerate() {
            y[g] = st.y[l];
        }
    }
    IterateState { y, agents: agents.iter().map(|s| s.it.clone()).collect(), delta }
}

fn tagged(k: usize, e: Error) -> Error {
    match e {
        e @ Error::AgentKktSingular { .. } => e,
        e => Error::AgentKktSingular { agent: k, detail: e.to_string() },
    }
}

/// Interior-point solve in which every stage is computed by the agents of
/// `tree`: the search direction by quadratic message passing, step sizes,
/// perturbation and the stopping test by tree reductions.
pub fn solve_distributed<T: Scalar>(
    sdp: &CoupledSdp<T>,
    tree: &AgentTree,
    opts: &SolverOptions,
) -> Result<DistributedSolution<T>> {
    solve_distributed_observed(sdp, tree, opts, &mut |_| {})
}

/// [`solve_distributed`] with a hook called every iteration.
pub fn solve_distributed_observed<T: Scalar>(
    sdp: &CoupledSdp<T>,
    tree: &AgentTree,
    opts: &SolverOptions,
    observer: &mut dyn FnMut(&IterationView<'_, T>),
) -> Result<DistributedSolution<T>> {
    opts.validate()?;
    if tree.len() != sdp.agents.len() {
        return Err(Error::IndexInconsistency(format!("{} agents for {} subproblems", tree.len(), sdp.agents.len())));
    }
    let q = tree.len();
    let n_y = sdp.n_y();
    let mut comm = CommLog::new(q, tree.height());

    // setup: structural start, then μ₀, the normaliser and ‖b‖ by a sum-reduction
    let floor = T::lit(0.1);
    let mut agents: Vec<AgentState<T>> = sdp
        .agents
        .iter()
        .map(|a| {
            let mut y = DVector::zeros(a.support.len());
            for &m in &a.ranges {
                let l = a.support.binary_search(&sdp.index.dist(m)).expect("owned distance in support");
                y[l] = sdp.range_values[m].max(floor);
            }
            for &m in &a.anchor_meas {
                let l = a.support.binary_search(&sdp.index.anchor_dist(m)).expect("owned distance in support");
                y[l] = sdp.anchor_values[m].max(floor);
            }
            AgentState { y, it: initial_agent_iterate(a) }
        })
        .collect();
    let mut setup = vec![(T::zero(), 0usize, T::zero()); q];
    for (k, a) in sdp.agents.iter().enumerate() {
        let (s, c) = agent_complementarity(a, &agents[k].it, &agents[k].y);
        setup[k] = (s, c, a.b.norm_squared() + a.a_rhs.norm_squared());
    }
    for &k in tree.postorder() {
        for &c in &tree.node(k).children {
            let (s, n, b) = setup[c];
            setup[k].0 += s;
            setup[k].1 += n;
            setup[k].2 += b;
        }
    }
    let (compl0, den, b_sq) = setup[tree.root()];
    let den_t = T::of_usize(den.max(1));
    let b_norm = b_sq.sqrt();
    let traffic = PassTraffic::of(tree, |_| 3, 3);
    comm.record_pass(0, Pass::Setup, &traffic.up, &traffic.down);
    let sigma_c = T::lit(opts.sigma_c);
    let mut delta = compl0 / den_t;
    if !opts.center_first {
        delta *= sigma_c;
    }

    let gamma = T::lit(opts.gamma);
    let mut trace = Vec::new();
    let mut status = Status::MaxIterations;
    let mut iterations = 0;
    let mut factor_orders = vec![0; q];
    for iter in 1..=opts.max_iters {
        // pass 1: search direction
        let mut scalings = Vec::with_capacity(q);
        let mut residuals = Vec::with_capacity(q);
        let mut qps = Vec::with_capacity(q);
        let mut failure = None;
        for (k, a) in sdp.agents.iter().enumerate() {
            let st = &agents[k];
            match agent_scaling(a, &st.it) {
                Ok(scal) => {
                    let res = agent_residuals(a, &st.it, &st.y, &scal, delta);
                    qps.push(agent_qp(a, &st.it, &st.y, &scal, &res));
                    scalings.push(scal);
                    residuals.push(res);
                }
                Err(e) => {
                    failure = Some(tagged(k, e));
                    break;
                }
            }
        }
        let tree_sol = match failure {
            Some(e) => Err(e),
            None => solve_tree_qp(tree, &qps, n_y),
        };
        let tree_sol = match tree_sol {
            Ok(s) => s,
            Err(e) => {
                status = Status::KktSingular(format!("iteration {iter}: {e}"));
                break;
            }
        };
        factor_orders.clone_from(&tree_sol.factor_orders);
        let traffic = PassTraffic {
            up: tree.nodes().iter().map(|n| if n.parent.is_some() { (1, n.message_payload()) } else { (0, 0) }).collect(),
            down: tree
                .nodes()
                .iter()
                .map(|n| (n.children.len(), n.children.iter().map(|&c| tree.node(c).s()).sum()))
                .collect(),
        };
        comm.record_pass(iter, Pass::Direction, &traffic.up, &traffic.down);
        let mut dirs: Vec<AgentDirection<T>> = Vec::with_capacity(q);
        let mut dys: Vec<DVector<T>> = Vec::with_capacity(q);
        for (k, a) in sdp.agents.iter().enumerate() {
            let ns = a.support.len();
            let w = &tree_sol.local[k];
            let dy = w.rows(0, ns).into_owned();
            let dx = w.rows(ns, a.n_x()).into_owned();
            let st = &agents[k];
            dirs.push(recover_agent_direction(a, &st.it, &st.y, &scalings[k], &residuals[k], &dy, dx, &tree_sol.duals[k]));
            dys.push(dy);
        }
        {
            let state = assemble(sdp, &agents, delta);
            let direction = SearchDirection { dy: tree_sol.shared.clone(), agents: dirs.clone() };
            observer(&IterationView { iter, state: &state, direction: &direction, factor_orders: &factor_orders });
        }

        // pass 2: step sizes
        let bounds: Vec<_> = sdp
            .agents
            .iter()
            .enumerate()
            .map(|(k, a)| agent_step_bounds(a, &agents[k].it, &agents[k].y, &dys[k], &dirs[k]))
            .collect();
        let ((tp, td), traffic) = reduce_step_sizes(tree, &bounds, gamma);
        comm.record_pass(iter, Pass::StepSize, &traffic.up, &traffic.down);
        for k in 0..q {
            let st = &mut agents[k];
            st.y.axpy(tp, &dys[k], T::one());
            apply_agent_step(&mut st.it, &dirs[k], tp, td);
        }
        iterations = iter;

        // pass 3: perturbation and termination
        let inputs: Vec<TerminationInput<T>> = sdp
            .agents
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let st = &agents[k];
                let (rdl, rd, rp, rpl) = agent_feasibility(a, &st.it, &st.y);
                TerminationInput {
                    complementarity: agent_complementarity(a, &st.it, &st.y).0,
                    primal_sq: rp.norm_squared(),
                    primal_lin_sq: rpl.norm_squared(),
                    dual_sq: rd.norm_squared(),
                    dual_lin_share: rdl,
                    support: a.support.clone(),
                }
            })
            .collect();
        let (tot, traffic) = reduce_termination(tree, &inputs);
        comm.record_pass(iter, Pass::Termination, &traffic.up, &traffic.down);
        let mu = tot.complementarity / den_t;
        delta = sigma_c * mu;
        let norms = ResidualNorms {
            primal: tot.primal_sq.sqrt(),
            primal_lin: tot.primal_lin_sq.sqrt(),
            dual: tot.dual_sq.sqrt(),
            dual_lin: tot.dual_lin_sq.sqrt(),
        };
        trace.push(trace_row(iter, mu, delta, &norms, tp, td));
        if should_stop(&norms, mu, b_norm, opts) {
            status = Status::Converged;
            break;
        }
    }
    let state = assemble(sdp, &agents, delta);
    Ok(DistributedSolution { solution: finish(sdp, state, status, iterations, trace), comm, factor_orders })
}
