use nalgebra::{DMatrix, DVector};

use super::state::{AgentDirection, AgentIterate, IterateState, SearchDirection};
use crate::error::{Error, Result};
use crate::relaxation::{AgentSubproblem, CoupledSdp};
use crate::scalar::Scalar;
use crate::sdplinalg::{nt_scaling, svec_identity, svec_unchecked, Ldlt, ScalingPoint};

/// NT scaling of every block of one agent.
pub fn agent_scaling<T: Scalar>(a: &AgentSubproblem<T>, it: &AgentIterate<T>) -> Result<Vec<ScalingPoint<T>>> {
    (0..a.blocks.len()).map(|b| nt_scaling(&it.x_block(a, b), &it.z_block(a, b))).collect()
}

pub fn compute_scalings<T: Scalar>(sdp: &CoupledSdp<T>, state: &IterateState<T>) -> Result<Vec<Vec<ScalingPoint<T>>>> {
    sdp.agents
        .iter()
        .zip(&state.agents)
        .map(|(a, it)| {
            agent_scaling(a, it).map_err(|e| Error::KktSingular(format!("agent {}: {e}", a.agent + 1)))
        })
        .collect()
}

/// Residuals of one agent; `r_d_lin` is this agent's share over `J_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentResiduals<T: Scalar> {
    pub r_d_lin: DVector<T>,
    pub r_d: DVector<T>,
    pub r_c: DVector<T>,
    pub r_c_lin: DVector<T>,
    pub r_p: DVector<T>,
    pub r_p_lin: DVector<T>,
}

/// Euclidean norms of the four feasibility residuals.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ResidualNorms<T> {
    pub primal: T,
    pub primal_lin: T,
    pub dual: T,
    pub dual_lin: T,
}

impl<T: Scalar> ResidualNorms<T> {
    pub fn max(&self) -> T {
        self.primal.max(self.primal_lin).max(self.dual).max(self.dual_lin)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Residuals<T: Scalar> {
    /// Global dual residual over `y`.
    pub r_d_lin: DVector<T>,
    pub agents: Vec<AgentResiduals<T>>,
    pub norms: ResidualNorms<T>,
}

/// Residuals that do not involve the complementarity perturbation:
/// `(r_d_lin share, r_d, r_p, r_p_lin)`.
pub fn agent_feasibility<T: Scalar>(
    a: &AgentSubproblem<T>,
    it: &AgentIterate<T>,
    y_local: &DVector<T>,
) -> (DVector<T>, DVector<T>, DVector<T>, DVector<T>) {
    let r_d_lin = -&a.cost_y - a.w.tr_mul(&it.v) - a.a.tr_mul(&it.v_bar) - a.d.tr_mul(&it.lambda);
    let r_d = &it.z - a.q.tr_mul(&it.v) - &a.cost_x;
    let r_p = &a.b - &a.q * &it.x - &a.w * y_local;
    let r_p_lin = &a.a_rhs - &a.a * y_local;
    (r_d_lin, r_d, r_p, r_p_lin)
}

pub fn agent_residuals<T: Scalar>(
    a: &AgentSubproblem<T>,
    it: &AgentIterate<T>,
    y_local: &DVector<T>,
    scal: &[ScalingPoint<T>],
    delta: T,
) -> AgentResiduals<T> {
    let (r_d_lin, r_d, r_p, r_p_lin) = agent_feasibility(a, it, y_local);
    let mut r_c = DVector::zeros(a.n_x());
    for (b, blk) in a.blocks.iter().enumerate() {
        let v = svec_identity::<T>(blk.order) * delta - svec_unchecked(&scal[b].h_xz());
        r_c.rows_mut(blk.offset, blk.len()).copy_from(&v);
    }
    let slack = &a.d * y_local - &a.g;
    let r_c_lin = DVector::from_fn(a.n_ineq(), |i, _| -delta - it.lambda[i] * slack[i]);
    AgentResiduals { r_d_lin, r_d, r_c, r_c_lin, r_p, r_p_lin }
}

pub(crate) fn scatter_add<T: Scalar>(target: &mut DVector<T>, support: &[usize], local: &DVector<T>) {
    for (l, &g) in support.iter().enumerate() {
        target[g] += local[l];
    }
}

/// Norms of the four feasibility residuals at `state`.
pub fn feasibility_norms<T: Scalar>(sdp: &CoupledSdp<T>, state: &IterateState<T>) -> ResidualNorms<T> {
    let mut dual_lin = DVector::zeros(sdp.n_y());
    let mut n = ResidualNorms { primal: T::zero(), primal_lin: T::zero(), dual: T::zero(), dual_lin: T::zero() };
    for (a, it) in sdp.agents.iter().zip(&state.agents) {
        let (rdl, rd, rp, rpl) = agent_feasibility(a, it, &a.gather(&state.y));
        scatter_add(&mut dual_lin, &a.support, &rdl);
        n.primal += rp.norm_squared();
        n.primal_lin += rpl.norm_squared();
        n.dual += rd.norm_squared();
    }
    ResidualNorms {
        primal: n.primal.sqrt(),
        primal_lin: n.primal_lin.sqrt(),
        dual: n.dual.sqrt(),
        dual_lin: dual_lin.norm(),
    }
}

pub fn compute_residuals<T: Scalar>(
    sdp: &CoupledSdp<T>,
    state: &IterateState<T>,
    scalings: &[Vec<ScalingPoint<T>>],
) -> Residuals<T> {
    let mut r_d_lin = DVector::zeros(sdp.n_y());
    let mut agents = Vec::with_capacity(sdp.agents.len());
    let (mut p, mut pl, mut d) = (T::zero(), T::zero(), T::zero());
    for ((a, it), scal) in sdp.agents.iter().zip(&state.agents).zip(scalings) {
        let r = agent_residuals(a, it, &a.gather(&state.y), scal, state.delta);
        scatter_add(&mut r_d_lin, &a.support, &r.r_d_lin);
        p += r.r_p.norm_squared();
        pl += r.r_p_lin.norm_squared();
        d += r.r_d.norm_squared();
        agents.push(r);
    }
    let norms = ResidualNorms { primal: p.sqrt(), primal_lin: pl.sqrt(), dual: d.sqrt(), dual_lin: r_d_lin.norm() };
    Residuals { r_d_lin, agents, norms }
}

/// Equality-constrained QP `min ½ wᵀ p w + qᵀ w  s.t.  c w = rhs` over
/// `w = (shared coordinates, private coordinates)`. The first
/// `support.len()` entries of `w` are the global coordinates `support`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalQp<T: Scalar> {
    pub support: Vec<usize>,
    pub n_private: usize,
    pub p: DMatrix<T>,
    pub q: DVector<T>,
    pub c: DMatrix<T>,
    pub rhs: DVector<T>,
}

impl<T: Scalar> LocalQp<T> {
    pub fn n(&self) -> usize {
        self.support.len() + self.n_private
    }

    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }
}

/// `E = diag(D y − g)` diagonal of one agent.
fn ineq_slack<T: Scalar>(a: &AgentSubproblem<T>, y_local: &DVector<T>) -> DVector<T> {
    &a.d * y_local - &a.g
}

/// One agent's share of the reduced QP: Hessian
/// `blkdiag(−D̄ᵀE⁻¹ΛD̄, F⁻¹U)`, linear term `−(r_lin share, r)` and
/// constraints `[W̄ Q; Ā 0] w = (r_p, r_p_lin)`.
pub fn agent_qp<T: Scalar>(
    a: &AgentSubproblem<T>,
    it: &AgentIterate<T>,
    y_local: &DVector<T>,
    scal: &[ScalingPoint<T>],
    res: &AgentResiduals<T>,
) -> LocalQp<T> {
    let nj = a.support.len();
    let nx = a.n_x();
    let e = ineq_slack(a, y_local);
    let mut p = DMatrix::zeros(nj + nx, nj + nx);
    // −Dᵀ E⁻¹ Λ D with E < 0
    let weights = DVector::from_fn(a.n_ineq(), |i, _| -it.lambda[i] / e[i]);
    let scaled_d = DMatrix::from_fn(a.n_ineq(), nj, |i, j| a.d[(i, j)] * weights[i]);
    p.view_mut((0, 0), (nj, nj)).copy_from(&a.d.tr_mul(&scaled_d));
    let mut rho = DVector::zeros(nj + nx);
    let e_inv_rcl = res.r_c_lin.component_div(&e);
    rho.rows_mut(0, nj).copy_from(&(&res.r_d_lin - a.d.tr_mul(&e_inv_rcl)));
    for (b, blk) in a.blocks.iter().enumerate() {
        let h = scal[b].w_inv_kron();
        p.view_mut((nj + blk.offset, nj + blk.offset), (blk.len(), blk.len())).copy_from(&h);
        let rc = res.r_c.rows(blk.offset, blk.len()).into_owned();
        let f_inv_rc = scal[b].apply_f_inv(&rc);
        let rd = res.r_d.rows(blk.offset, blk.len());
        rho.rows_mut(nj + blk.offset, blk.len()).copy_from(&(rd + f_inv_rc));
    }
    let mut c = DMatrix::zeros(a.n_eq(), nj + nx);
    c.view_mut((0, 0), (a.b.len(), nj)).copy_from(&a.w);
    c.view_mut((0, nj), (a.b.len(), nx)).copy_from(&a.q);
    c.view_mut((a.b.len(), 0), (a.a_rhs.len(), nj)).copy_from(&a.a);
    let mut rhs = DVector::zeros(a.n_eq());
    rhs.rows_mut(0, a.b.len()).copy_from(&res.r_p);
    rhs.rows_mut(a.b.len(), a.a_rhs.len()).copy_from(&res.r_p_lin);
    LocalQp { support: a.support.clone(), n_private: nx, p, q: -rho, c, rhs }
}

/// `Δz`, `Δλ` from `(Δy, Δx)` and the equality duals from the QP solve.
pub fn recover_agent_direction<T: Scalar>(
    a: &AgentSubproblem<T>,
    it: &AgentIterate<T>,
    y_local: &DVector<T>,
    scal: &[ScalingPoint<T>],
    res: &AgentResiduals<T>,
    dy_local: &DVector<T>,
    dx: DVector<T>,
    nu: &DVector<T>,
) -> AgentDirection<T> {
    let mut dz = DVector::zeros(a.n_x());
    for (b, blk) in a.blocks.iter().enumerate() {
        let rc = res.r_c.rows(blk.offset, blk.len()).into_owned();
        let rhs = rc - scal[b].apply_u(&dx.rows(blk.offset, blk.len()).into_owned());
        let v = scal[b].apply_f_inv(&rhs);
        dz.rows_mut(blk.offset, blk.len()).copy_from(&v);
    }
    let e = ineq_slack(a, y_local);
    let ddy = &a.d * dy_local;
    let dlambda = DVector::from_fn(a.n_ineq(), |i, _| (res.r_c_lin[i] - it.lambda[i] * ddy[i]) / e[i]);
    AgentDirection {
        dx,
        dz,
        dv: nu.rows(0, a.b.len()).into_owned(),
        dv_bar: nu.rows(a.b.len(), a.a_rhs.len()).into_owned(),
        dlambda,
    }
}

pub fn agent_qps<T: Scalar>(
    sdp: &CoupledSdp<T>,
    state: &IterateState<T>,
    scalings: &[Vec<ScalingPoint<T>>],
    res: &Residuals<T>,
) -> Vec<LocalQp<T>> {
    sdp.agents
        .iter()
        .enumerate()
        .map(|(k, a)| agent_qp(a, &state.agents[k], &a.gather(&state.y), &scalings[k], &res.agents[k]))
        .collect()
}

/// Dense global QP `(P, q, C, rhs)` over `(y, x^1, …, x^q)` built by summing
/// the agents' shares; constraint rows are stacked agent by agent.
pub fn assemble_global_qp<T: Scalar>(
    qps: &[LocalQp<T>],
    n_y: usize,
) -> (DMatrix<T>, DVector<T>, DMatrix<T>, DVector<T>) {
    let n = n_y + qps.iter().map(|q| q.n_private).sum::<usize>();
    let m = qps.iter().map(|q| q.n_rows()).sum::<usize>();
    let mut p = DMatrix::zeros(n, n);
    let mut lin = DVector::zeros(n);
    let mut c = DMatrix::zeros(m, n);
    let mut rhs = DVector::zeros(m);
    let (mut x_off, mut r_off) = (n_y, 0);
    for qp in qps {
        let ns = qp.support.len();
        let map = |l: usize| if l < ns { qp.support[l] } else { x_off + l - ns };
        for i in 0..qp.n() {
            lin[map(i)] += qp.q[i];
            for j in 0..qp.n() {
                p[(map(i), map(j))] += qp.p[(i, j)];
            }
            for r in 0..qp.n_rows() {
                c[(r_off + r, map(i))] += qp.c[(r, i)];
            }
        }
        rhs.rows_mut(r_off, qp.n_rows()).copy_from(&qp.rhs);
        x_off += qp.n_private;
        r_off += qp.n_rows();
    }
    (p, lin, c, rhs)
}

/// Solve `[P Cᵀ; C 0] (w, ν) = (−q, rhs)` with a symmetric-indefinite
/// factorization followed by one step of iterative refinement.
pub fn solve_saddle_point<T: Scalar>(
    p: &DMatrix<T>,
    q: &DVector<T>,
    c: &DMatrix<T>,
    rhs: &DVector<T>,
) -> Result<(DVector<T>, DVector<T>)> {
    let order: Vec<usize> = (0..p.nrows() + c.nrows()).collect();
    solve_saddle_point_ordered(p, q, c, rhs, &order)
}

/// As [`solve_saddle_point`], eliminating the unknowns `(w, ν)` in the given
/// order (a permutation of `0..n + m`). A good order keeps fill local.
pub fn solve_saddle_point_ordered<T: Scalar>(
    p: &DMatrix<T>,
    q: &DVector<T>,
    c: &DMatrix<T>,
    rhs: &DVector<T>,
    order: &[usize],
) -> Result<(DVector<T>, DVector<T>)> {
    let (n, m) = (p.nrows(), c.nrows());
    if order.len() != n + m {
        return Err(Error::DimensionMismatch(format!("elimination order of length {} for {} unknowns", order.len(), n + m)));
    }
    let entry = |i: usize, j: usize| match (i < n, j < n) {
        (true, true) => p[(i, j)],
        (false, true) => c[(i - n, j)],
        (true, false) => c[(j - n, i)],
        (false, false) => T::zero(),
    };
    let k = DMatrix::from_fn(n + m, n + m, |a, b| entry(order[a], order[b]));
    let b = DVector::from_fn(n + m, |a, _| {
        let i = order[a];
        if i < n {
            -q[i]
        } else {
            rhs[i - n]
        }
    });
    let f = Ldlt::factor(&k).map_err(|_| Error::KktSingular(format!("reduced system of order {} singular", n + m)))?;
    let mut sol = f.solve(&b);
    let r = &b - &k * &sol;
    sol += f.solve(&r);
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::KktSingular("non-finite direction".into()));
    }
    let mut full = DVector::zeros(n + m);
    for (a, &i) in order.iter().enumerate() {
        full[i] = sol[a];
    }
    Ok((full.rows(0, n).into_owned(), full.rows(n, m).into_owned()))
}

/// Elimination order for the assembled global system: each agent's matrix
/// variables and coupling rows, then `y`, then the linear-equality rows.
fn global_order<T: Scalar>(sdp: &CoupledSdp<T>) -> Vec<usize> {
    let n_y = sdp.n_y();
    let n = n_y + sdp.agents.iter().map(|a| a.n_x()).sum::<usize>();
    let mut order = Vec::new();
    let mut tail = Vec::new();
    let (mut x_off, mut r_off) = (n_y, n);
    for a in &sdp.agents {
        order.extend(x_off..x_off + a.n_x());
        order.extend(r_off..r_off + a.b.len());
        tail.extend(r_off + a.b.len()..r_off + a.n_eq());
        x_off += a.n_x();
        r_off += a.n_eq();
    }
    order.extend(0..n_y);
    order.extend(tail);
    order
}

/// Centralized search direction from the global reduced QP.
pub fn solve_kkt_centralized<T: Scalar>(
    sdp: &CoupledSdp<T>,
    state: &IterateState<T>,
    scalings: &[Vec<ScalingPoint<T>>],
    res: &Residuals<T>,
) -> Result<SearchDirection<T>> {
    let qps = agent_qps(sdp, state, scalings, res);
    let n_y = sdp.n_y();
    let (p, q, c, rhs) = assemble_global_qp(&qps, n_y);
    let (w, nu) = solve_saddle_point_ordered(&p, &q, &c, &rhs, &global_order(sdp))?;
    let dy = w.rows(0, n_y).into_owned();
    let (mut x_off, mut r_off) = (n_y, 0);
    let mut agents = Vec::with_capacity(sdp.agents.len());
    for (k, a) in sdp.agents.iter().enumerate() {
        let dx = w.rows(x_off, a.n_x()).into_owned();
        let nu_k = nu.rows(r_off, a.n_eq()).into_owned();
        agents.push(recover_agent_direction(
            a,
            &state.agents[k],
            &a.gather(&state.y),
            &scalings[k],
            &res.agents[k],
            &a.gather(&dy),
            dx,
            &nu_k,
        ));
        x_off += a.n_x();
        r_off += a.n_eq();
    }
    Ok(SearchDirection { dy, agents })
}

/// Largest relative residual of the six linearized optimality equations
/// when `dir` is substituted. Each block is measured against
/// `1 + max(‖rhs‖∞, ‖term‖∞ over its terms)`.
pub fn verify_direction<T: Scalar>(
    sdp: &CoupledSdp<T>,
    state: &IterateState<T>,
    scalings: &[Vec<ScalingPoint<T>>],
    res: &Residuals<T>,
    dir: &SearchDirection<T>,
) -> T {
    let rel = |diff: T, scale: T| diff / (T::one() + scale);
    let mut worst = T::zero();
    let mut lhs_lin = DVector::zeros(sdp.n_y());
    let mut lin_scale = res.r_d_lin.amax();
    for (k, a) in sdp.agents.iter().enumerate() {
        let (it, d, r) = (&state.agents[k], &dir.agents[k], &res.agents[k]);
        let y_local = a.gather(&state.y);
        let dy_local = a.gather(&dir.dy);
        let terms = [a.w.tr_mul(&d.dv), a.a.tr_mul(&d.dv_bar), a.d.tr_mul(&d.dlambda)];
        for t in &terms {
            lin_scale = lin_scale.max(t.amax());
            scatter_add(&mut lhs_lin, &a.support, t);
        }
        let qv = a.q.tr_mul(&d.dv);
        let e_b = (&qv - &d.dz - &r.r_d).amax();
        worst = worst.max(rel(e_b, r.r_d.amax().max(qv.amax()).max(d.dz.amax())));
        for (b, blk) in a.blocks.iter().enumerate() {
            let ux = &scalings[k][b].u_op * d.dx.rows(blk.offset, blk.len());
            let fz = &scalings[k][b].f_op * d.dz.rows(blk.offset, blk.len());
            let rc = r.r_c.rows(blk.offset, blk.len());
            let e_c = (&ux + &fz - rc).amax();
            worst = worst.max(rel(e_c, rc.amax().max(ux.amax()).max(fz.amax())));
        }
        let slack = ineq_slack(a, &y_local);
        let t1 = d.dlambda.component_mul(&slack);
        let t2 = it.lambda.component_mul(&(&a.d * &dy_local));
        let e_d = (&t1 + &t2 - &r.r_c_lin).amax();
        worst = worst.max(rel(e_d, r.r_c_lin.amax().max(t1.amax()).max(t2.amax())));
        let qx = &a.q * &d.dx;
        let wy = &a.w * &dy_local;
        let e_e = (&qx + &wy - &r.r_p).amax();
        worst = worst.max(rel(e_e, r.r_p.amax().max(qx.amax()).max(wy.amax())));
        let ay = &a.a * &dy_local;
        let e_f = (&ay - &r.r_p_lin).amax();
        worst = worst.max(rel(e_f, r.r_p_lin.amax().max(ay.amax())));
    }
    let e_a = (&lhs_lin - &res.r_d_lin).amax();
    worst.max(rel(e_a, lin_scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pdipm::initial_iterate;
    use crate::relaxation::{LocalizationProblem, RootChoice};
    use crate::scenario::{synthesize_measurements, NetworkScenario};
    use crate::sdplinalg::{h_op, smat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_sensors() -> CoupledSdp<f64> {
        let scn = NetworkScenario {
            dim: 2,
            rc: 1.0,
            seed: 0,
            anchors: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            sensors_true: Some(vec![vec![0.2, 0.3], vec![0.6, 0.4]]),
            range_measurements: vec![],
            anchor_measurements: vec![],
        };
        let scn = synthesize_measurements(&scn, 0.05, 0.05, 4).unwrap();
        LocalizationProblem::<f64>::new(&scn, RootChoice::Auto).unwrap().sdp
    }

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &g * g.transpose() + DMatrix::identity(n, n) * 0.2
    }

    /// Random strictly interior point with nonzero duals.
    fn random_state(sdp: &CoupledSdp<f64>, seed: u64) -> IterateState<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = initial_iterate(sdp);
        for v in state.y.iter_mut() {
            *v = rng.random_range(-0.5..0.5);
        }
        for m in 0..sdp.range_values.len() {
            state.y[sdp.index.dist(m)] = rng.random_range(0.1..1.0);
        }
        for m in 0..sdp.anchor_values.len() {
            state.y[sdp.index.anchor_dist(m)] = rng.random_range(0.1..1.0);
        }
        for (a, it) in sdp.agents.iter().zip(&mut state.agents) {
            for blk in &a.blocks {
                it.x.rows_mut(blk.offset, blk.len()).copy_from(&svec_unchecked(&random_spd(blk.order, &mut rng)));
                it.z.rows_mut(blk.offset, blk.len()).copy_from(&svec_unchecked(&random_spd(blk.order, &mut rng)));
            }
            it.v.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
            it.v_bar.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
            it.lambda.iter_mut().for_each(|v| *v = rng.random_range(0.1..2.0));
        }
        state.delta = 0.3;
        state
    }

    fn direction(sdp: &CoupledSdp<f64>, state: &IterateState<f64>) -> (Residuals<f64>, Vec<Vec<ScalingPoint<f64>>>, SearchDirection<f64>) {
        let scal = compute_scalings(sdp, state).unwrap();
        let res = compute_residuals(sdp, state, &scal);
        let dir = solve_kkt_centralized(sdp, state, &scal, &res).unwrap();
        (res, scal, dir)
    }

    #[test]
    fn identity_blocks_with_unit_delta_have_no_complementarity_residual() {
        let sdp = two_sensors();
        let mut state = initial_iterate(&sdp);
        state.delta = 1.0;
        let scal = compute_scalings(&sdp, &state).unwrap();
        let res = compute_residuals(&sdp, &state, &scal);
        for r in &res.agents {
            assert!(r.r_c.amax() < 1e-14);
        }
    }

    #[test]
    fn residuals_match_dense_recomputation() {
        let sdp = two_sensors();
        let state = random_state(&sdp, 11);
        let scal = compute_scalings(&sdp, &state).unwrap();
        let res = compute_residuals(&sdp, &state, &scal);
        let mut rdl = DVector::zeros(sdp.n_y());
        for (k, a) in sdp.agents.iter().enumerate() {
            let it = &state.agents[k];
            let r = &res.agents[k];
            // entry by entry from the stored matrices
            for (l, &g) in a.support.iter().enumerate() {
                let mut s = -a.cost_y[l];
                for i in 0..a.b.len() {
                    s -= a.w[(i, l)] * it.v[i];
                }
                for i in 0..a.a_rhs.len() {
                    s -= a.a[(i, l)] * it.v_bar[i];
                }
                for i in 0..a.n_ineq() {
                    s -= a.d[(i, l)] * it.lambda[i];
                }
                rdl[g] += s;
            }
            for i in 0..a.n_x() {
                let qv: f64 = (0..a.b.len()).map(|r| a.q[(r, i)] * it.v[r]).sum();
                assert!((r.r_d[i] - (it.z[i] - qv - a.cost_x[i])).abs() < 1e-12);
            }
            for i in 0..a.b.len() {
                let qx: f64 = (0..a.n_x()).map(|c| a.q[(i, c)] * it.x[c]).sum();
                let wy: f64 = a.support.iter().enumerate().map(|(l, &g)| a.w[(i, l)] * state.y[g]).sum();
                assert!((r.r_p[i] - (a.b[i] - qx - wy)).abs() < 1e-12);
            }
            for i in 0..a.a_rhs.len() {
                let ay: f64 = a.support.iter().enumerate().map(|(l, &g)| a.a[(i, l)] * state.y[g]).sum();
                assert!((r.r_p_lin[i] - (a.a_rhs[i] - ay)).abs() < 1e-12);
            }
            for i in 0..a.n_ineq() {
                let dy: f64 = a.support.iter().enumerate().map(|(l, &g)| a.d[(i, l)] * state.y[g]).sum();
                let want = -state.delta - it.lambda[i] * (dy - a.g[i]);
                assert!((r.r_c_lin[i] - want).abs() < 1e-12);
            }
            // r_c from the definition of H_D with the scaling's own D
            for (b, blk) in a.blocks.iter().enumerate() {
                let xz = it.x_block(a, b) * it.z_block(a, b);
                let h = h_op(&scal[k][b].g_inv, &xz).unwrap();
                let want = DMatrix::identity(blk.order, blk.order) * state.delta - h;
                let got = smat(&r.r_c.rows(blk.offset, blk.len()).into_owned()).unwrap();
                assert!((got - want).amax() < 1e-12);
            }
        }
        assert!((&res.r_d_lin - rdl).amax() < 1e-12);
    }

    #[test]
    fn direction_satisfies_linearized_system() {
        let sdp = two_sensors();
        for seed in 0..5 {
            let state = random_state(&sdp, seed);
            let (res, scal, dir) = direction(&sdp, &state);
            assert!(verify_direction(&sdp, &state, &scal, &res, &dir) <= 1e-8);
        }
        let state = initial_iterate(&sdp);
        let (res, scal, dir) = direction(&sdp, &state);
        assert!(verify_direction(&sdp, &state, &scal, &res, &dir) <= 1e-8);
    }

    #[test]
    fn direction_is_linear_in_the_residuals() {
        let sdp = two_sensors();
        let state = random_state(&sdp, 3);
        let (mut res, scal, dir) = direction(&sdp, &state);
        let scale = |r: &mut Residuals<f64>, f: f64| {
            r.r_d_lin *= f;
            for a in &mut r.agents {
                a.r_d_lin *= f;
                a.r_d *= f;
                a.r_c *= f;
                a.r_c_lin *= f;
                a.r_p *= f;
                a.r_p_lin *= f;
            }
        };
        scale(&mut res, 2.0);
        let doubled = solve_kkt_centralized(&sdp, &state, &scal, &res).unwrap();
        let mut scaled = dir.clone();
        scaled.dy *= 2.0;
        for a in &mut scaled.agents {
            a.dx *= 2.0;
            a.dz *= 2.0;
            a.dv *= 2.0;
            a.dv_bar *= 2.0;
            a.dlambda *= 2.0;
        }
        assert!(doubled.max_abs_diff(&scaled) <= 1e-9 * (1.0 + scaled.amax()));
        scale(&mut res, 0.0);
        let none = solve_kkt_centralized(&sdp, &state, &scal, &res).unwrap();
        assert_eq!(none.amax(), 0.0);
    }

    #[test]
    fn reduced_hessian_is_positive_semidefinite() {
        let sdp = two_sensors();
        let state = random_state(&sdp, 5);
        let scal = compute_scalings(&sdp, &state).unwrap();
        let res = compute_residuals(&sdp, &state, &scal);
        for qp in agent_qps(&sdp, &state, &scal, &res) {
            let eig = qp.p.clone().symmetric_eigenvalues();
            assert!(eig.min() >= -1e-10 * (1.0 + eig.amax()));
        }
        let (p, ..) = assemble_global_qp(&agent_qps(&sdp, &state, &scal, &res), sdp.n_y());
        assert!(p.symmetric_eigenvalues().min() >= -1e-10);
    }

    #[test]
    fn saddle_point_order_does_not_change_the_solution() {
        let sdp = two_sensors();
        let state = random_state(&sdp, 8);
        let scal = compute_scalings(&sdp, &state).unwrap();
        let res = compute_residuals(&sdp, &state, &scal);
        let (p, q, c, rhs) = assemble_global_qp(&agent_qps(&sdp, &state, &scal, &res), sdp.n_y());
        let (w1, nu1) = solve_saddle_point(&p, &q, &c, &rhs).unwrap();
        let (w2, nu2) = solve_saddle_point_ordered(&p, &q, &c, &rhs, &global_order(&sdp)).unwrap();
        assert!((w1 - w2).amax() < 1e-9);
        assert!((nu1 - nu2).amax() < 1e-9);
        assert!(solve_saddle_point_ordered(&p, &q, &c, &rhs, &[0, 1]).is_err());
    }
}
