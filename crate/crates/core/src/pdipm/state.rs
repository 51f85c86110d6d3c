use nalgebra::{DMatrix, DVector};

use crate::relaxation::{AgentSubproblem, CoupledSdp};
use crate::scalar::Scalar;
use crate::sdplinalg::{smat, svec_identity};

/// Primal-dual variables owned by one agent.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentIterate<T: Scalar> {
    /// Stacked `svec` of the matrix blocks `X^k`.
    pub x: DVector<T>,
    /// Stacked `svec` of the dual blocks `Z^k`.
    pub z: DVector<T>,
    /// Duals of the matrix-definition equalities.
    pub v: DVector<T>,
    /// Duals of the linear equalities.
    pub v_bar: DVector<T>,
    /// Inequality multipliers.
    pub lambda: DVector<T>,
}

impl<T: Scalar> AgentIterate<T> {
    pub fn x_block(&self, sub: &AgentSubproblem<T>, b: usize) -> DMatrix<T> {
        block(&self.x, sub, b)
    }

    pub fn z_block(&self, sub: &AgentSubproblem<T>, b: usize) -> DMatrix<T> {
        block(&self.z, sub, b)
    }
}

fn block<T: Scalar>(v: &DVector<T>, sub: &AgentSubproblem<T>, b: usize) -> DMatrix<T> {
    let spec = &sub.blocks[b];
    smat(&v.rows(spec.offset, spec.len()).into_owned()).expect("block slice has triangular length")
}

/// Full primal-dual point of the coupled problem.
#[derive(Clone, Debug, PartialEq)]
pub struct IterateState<T: Scalar> {
    pub y: DVector<T>,
    pub agents: Vec<AgentIterate<T>>,
    /// Perturbation parameter.
    pub delta: T,
}

/// `X = Z = I`, `λ = 1`, zero equality duals, `y = 0` except distance
/// variables started at `max(measured range, 0.1)`; `δ` is the resulting `μ`.
pub fn initial_iterate<T: Scalar>(sdp: &CoupledSdp<T>) -> IterateState<T> {
    let floor = T::lit(0.1);
    let mut y = DVector::zeros(sdp.n_y());
    for (m, &r) in sdp.range_values.iter().enumerate() {
        y[sdp.index.dist(m)] = r.max(floor);
    }
    for (m, &r) in sdp.anchor_values.iter().enumerate() {
        y[sdp.index.anchor_dist(m)] = r.max(floor);
    }
    let agents = sdp.agents.iter().map(|a| initial_agent_iterate(a)).collect();
    let mut state = IterateState { y, agents, delta: T::one() };
    state.delta = duality_measure(sdp, &state);
    state
}

pub(crate) fn initial_agent_iterate<T: Scalar>(a: &AgentSubproblem<T>) -> AgentIterate<T> {
    let mut x = DVector::zeros(a.n_x());
    for blk in &a.blocks {
        x.rows_mut(blk.offset, blk.len()).copy_from(&svec_identity::<T>(blk.order));
    }
    AgentIterate {
        z: x.clone(),
        x,
        v: DVector::zeros(a.b.len()),
        v_bar: DVector::zeros(a.a_rhs.len()),
        lambda: DVector::from_element(a.n_ineq(), T::one()),
    }
}

/// Complementarity sum `⟨X,Z⟩ + λᵀ(g − Dy)` and its normaliser
/// (block orders plus inequality count) for one agent.
pub fn agent_complementarity<T: Scalar>(a: &AgentSubproblem<T>, it: &AgentIterate<T>, y_local: &DVector<T>) -> (T, usize) {
    let slack = &a.g - &a.d * y_local;
    (it.x.dot(&it.z) + it.lambda.dot(&slack), a.block_order_sum() + a.n_ineq())
}

/// Duality measure `μ`, summed over agents in index order.
pub fn duality_measure<T: Scalar>(sdp: &CoupledSdp<T>, state: &IterateState<T>) -> T {
    let (mut num, mut den) = (T::zero(), 0usize);
    for (a, it) in sdp.agents.iter().zip(&state.agents) {
        let (s, c) = agent_complementarity(a, it, &a.gather(&state.y));
        num += s;
        den += c;
    }
    num / T::of_usize(den.max(1))
}

/// Search direction, split like [`IterateState`].
#[derive(Clone, Debug, PartialEq)]
pub struct SearchDirection<T: Scalar> {
    pub dy: DVector<T>,
    pub agents: Vec<AgentDirection<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentDirection<T: Scalar> {
    pub dx: DVector<T>,
    pub dz: DVector<T>,
    pub dv: DVector<T>,
    pub dv_bar: DVector<T>,
    pub dlambda: DVector<T>,
}

impl<T: Scalar> SearchDirection<T> {
    /// Largest absolute entry over all components.
    pub fn amax(&self) -> T {
        self.agents.iter().fold(self.dy.amax(), |m, a| {
            m.max(a.dx.amax()).max(a.dz.amax()).max(a.dv.amax()).max(a.dv_bar.amax()).max(a.dlambda.amax())
        })
    }

    /// `max |self − other|` over all components.
    pub fn max_abs_diff(&self, other: &SearchDirection<T>) -> T {
        let d = |a: &DVector<T>, b: &DVector<T>| (a - b).amax();
        self.agents.iter().zip(&other.agents).fold(d(&self.dy, &other.dy), |m, (a, b)| {
            m.max(d(&a.dx, &b.dx))
                .max(d(&a.dz, &b.dz))
                .max(d(&a.dv, &b.dv))
                .max(d(&a.dv_bar, &b.dv_bar))
                .max(d(&a.dlambda, &b.dlambda))
        })
    }
}
