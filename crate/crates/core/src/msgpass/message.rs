use nalgebra::{DMatrix, DVector};

use super::tree::{AgentNode, AgentTree};
use crate::error::{Error, Result};
use crate::pdipm::LocalQp;
use crate::scalar::Scalar;
use crate::sdplinalg::Ldlt;

/// Quadratic `½ ΔᵀHΔ + hᵀΔ` over global coordinates `coords`. The constant
/// term is not carried.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticMessage<T: Scalar> {
    pub from: usize,
    pub coords: Vec<usize>,
    pub hess: DMatrix<T>,
    pub lin: DVector<T>,
}

impl<T: Scalar> QuadraticMessage<T> {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Scalars on the wire: upper triangle of `H` plus `h`.
    pub fn payload(&self) -> usize {
        let s = self.len();
        s * (s + 1) / 2 + s
    }

    pub fn eval(&self, x: &DVector<T>) -> T {
        (x.dot(&(&self.hess * x))) * T::lit(0.5) + self.lin.dot(x)
    }
}

/// What an agent keeps after sending its message: the factorized local
/// system over residual coordinates and the coupling to its separator.
#[derive(Clone, Debug)]
pub struct Elimination<T: Scalar> {
    pub agent: usize,
    factor: Ldlt<T>,
    sep_local: Vec<usize>,
    res_local: Vec<usize>,
    n_w: usize,
    n_eq: usize,
    /// `[P_RS; C_S]`.
    coupling: DMatrix<T>,
    /// `[−q_R; rhs]`.
    base: DVector<T>,
}

impl<T: Scalar> Elimination<T> {
    /// Order of the factorized matrix, `r_k + e_k`.
    pub fn order(&self) -> usize {
        self.factor.order()
    }

    /// Local solution `(w, ν)` with the separator fixed to `sep_values`
    /// (in the order of the agent's separator coordinates).
    pub fn back_substitute(&self, sep_values: &DVector<T>) -> Result<(DVector<T>, DVector<T>)> {
        if sep_values.len() != self.sep_local.len() {
            return Err(Error::DimensionMismatch(format!(
                "agent {} expects {} separator values, got {}",
                self.agent + 1,
                self.sep_local.len(),
                sep_values.len()
            )));
        }
        let sol = self.factor.solve(&(&self.base - &self.coupling * sep_values));
        if sol.iter().any(|v| !v.is_finite()) {
            return Err(Error::AgentKktSingular { agent: self.agent, detail: "non-finite local solution".into() });
        }
        let mut w = DVector::zeros(self.n_w);
        for (a, &l) in self.sep_local.iter().enumerate() {
            w[l] = sep_values[a];
        }
        let r = self.res_local.len();
        for (a, &l) in self.res_local.iter().enumerate() {
            w[l] = sol[a];
        }
        Ok((w, sol.rows(r, self.n_eq).into_owned()))
    }
}

fn local_index(support: &[usize], g: usize, agent: usize) -> Result<usize> {
    support.binary_search(&g).map_err(|_| {
        Error::IndexInconsistency(format!("coordinate {g} not in the support of agent {}", agent + 1))
    })
}

/// Local `(P, q)` with the children's messages added on their coordinates.
pub fn fold_messages<T: Scalar>(
    agent: usize,
    qp: &LocalQp<T>,
    children: &[QuadraticMessage<T>],
) -> Result<(DMatrix<T>, DVector<T>)> {
    let mut p = qp.p.clone();
    let mut q = qp.q.clone();
    for m in children {
        let loc: Vec<usize> = m.coords.iter().map(|&g| local_index(&qp.support, g, agent)).collect::<Result<_>>()?;
        for (a, &i) in loc.iter().enumerate() {
            q[i] += m.lin[a];
            for (b, &j) in loc.iter().enumerate() {
                p[(i, j)] += m.hess[(a, b)];
            }
        }
    }
    Ok((p, q))
}

/// Eliminate the residual coordinates of `node` from its local QP plus the
/// children's messages. Returns the message for the parent (empty at the
/// root) and the data needed for the downward pass.
///
/// With separator `S` and residual `R`, `K = [P_RR C_Rᵀ; C_R 0]`,
/// `B = [P_RS; C_S]` and `b₀ = [−q_R; rhs]`, the message is
/// `H = P_SS − Bᵀ K⁻¹ B`, `h = q_S + Bᵀ K⁻¹ b₀`.
pub fn upward_message<T: Scalar>(
    node: &AgentNode,
    qp: &LocalQp<T>,
    children: &[QuadraticMessage<T>],
) -> Result<(QuadraticMessage<T>, Elimination<T>)> {
    let k = node.id;
    let (n, m) = (qp.n(), qp.n_rows());
    if qp.p.nrows() != n || qp.c.ncols() != n || qp.q.len() != n {
        return Err(Error::DimensionMismatch(format!("local QP of agent {} has inconsistent blocks", k + 1)));
    }
    let (p, q) = fold_messages(k, qp, children)?;
    let sep_local: Vec<usize> = node.separator.iter().map(|&g| local_index(&qp.support, g, k)).collect::<Result<_>>()?;
    let mut is_sep = vec![false; n];
    for &l in &sep_local {
        is_sep[l] = true;
    }
    let res_local: Vec<usize> = (0..n).filter(|&l| !is_sep[l]).collect();
    let (r, s) = (res_local.len(), sep_local.len());
    let kmat = DMatrix::from_fn(r + m, r + m, |i, j| match (i < r, j < r) {
        (true, true) => p[(res_local[i], res_local[j])],
        (false, true) => qp.c[(i - r, res_local[j])],
        (true, false) => qp.c[(j - r, res_local[i])],
        (false, false) => T::zero(),
    });
    let coupling = DMatrix::from_fn(r + m, s, |i, j| {
        if i < r {
            p[(res_local[i], sep_local[j])]
        } else {
            qp.c[(i - r, sep_local[j])]
        }
    });
    let base = DVector::from_fn(r + m, |i, _| if i < r { -q[res_local[i]] } else { qp.rhs[i - r] });
    let factor = Ldlt::factor(&kmat).map_err(|_| Error::AgentKktSingular {
        agent: k,
        detail: format!("local matrix of order {} singular", r + m),
    })?;
    let k_inv_b = factor.solve_matrix(&coupling);
    let k_inv_b0 = factor.solve(&base);
    let mut hess = DMatrix::from_fn(s, s, |i, j| p[(sep_local[i], sep_local[j])]) - coupling.tr_mul(&k_inv_b);
    crate::sdplinalg::symmetrize(&mut hess);
    let lin = DVector::from_fn(s, |i, _| q[sep_local[i]]) + coupling.tr_mul(&k_inv_b0);
    if hess.iter().chain(lin.iter()).any(|v| !v.is_finite()) {
        return Err(Error::AgentKktSingular { agent: k, detail: "non-finite message".into() });
    }
    let msg = QuadraticMessage { from: k, coords: node.separator.clone(), hess, lin };
    let elim = Elimination { agent: k, factor, sep_local, res_local, n_w: n, n_eq: m, coupling, base };
    Ok((msg, elim))
}

/// Result of one upward-downward pass over a tree of local QPs.
#[derive(Clone, Debug)]
pub struct TreeQpSolution<T: Scalar> {
    /// Shared coordinates, each written by the agent that eliminates it.
    pub shared: DVector<T>,
    /// Full local `w` of every agent (shared then private entries).
    pub local: Vec<DVector<T>>,
    /// Equality multipliers of every agent.
    pub duals: Vec<DVector<T>>,
    /// Upward message of every agent (empty at the root).
    pub messages: Vec<QuadraticMessage<T>>,
    /// Order of the matrix each agent factorized.
    pub factor_orders: Vec<usize>,
}

impl<T: Scalar> TreeQpSolution<T> {
    pub fn private(&self, qps: &[LocalQp<T>], k: usize) -> DVector<T> {
        let ns = qps[k].support.len();
        self.local[k].rows(ns, qps[k].n_private).into_owned()
    }
}

/// Solve `Σ_k (½ w_kᵀ P_k w_k + q_kᵀ w_k)` subject to every `C_k w_k = rhs_k`
/// with one upward pass of quadratic messages (leaves first) and one
/// downward pass of separator values. `n_shared` sizes the global
/// coordinate vector.
pub fn solve_tree_qp<T: Scalar>(tree: &AgentTree, qps: &[LocalQp<T>], n_shared: usize) -> Result<TreeQpSolution<T>> {
    let q = tree.len();
    if qps.len() != q {
        return Err(Error::DimensionMismatch(format!("{q} agents but {} local QPs", qps.len())));
    }
    let mut messages: Vec<Option<QuadraticMessage<T>>> = vec![None; q];
    let mut elims: Vec<Option<Elimination<T>>> = vec![None; q];
    for &k in tree.postorder() {
        let node = tree.node(k);
        let inbox: Vec<QuadraticMessage<T>> =
            node.children.iter().map(|&c| messages[c].clone().expect("children precede parents")).collect();
        let (msg, elim) = upward_message(node, &qps[k], &inbox)?;
        messages[k] = Some(msg);
        elims[k] = Some(elim);
    }
    let mut local: Vec<DVector<T>> = vec![DVector::zeros(0); q];
    let mut duals: Vec<DVector<T>> = vec![DVector::zeros(0); q];
    let mut shared = DVector::zeros(n_shared);
    for k in tree.preorder() {
        let node = tree.node(k);
        let sep_values = match node.parent {
            None => DVector::zeros(0),
            Some(p) => {
                let pw = &local[p];
                let vals: Vec<T> = node
                    .separator
                    .iter()
                    .map(|&g| local_index(&qps[p].support, g, p).map(|l| pw[l]))
                    .collect::<Result<_>>()?;
                DVector::from_vec(vals)
            }
        };
        let elim = elims[k].as_ref().expect("eliminated in the upward pass");
        let (w, nu) = elim.back_substitute(&sep_values)?;
        for &l in &elim.res_local {
            if l < qps[k].support.len() {
                let g = qps[k].support[l];
                if g >= n_shared {
                    return Err(Error::IndexInconsistency(format!("coordinate {g} beyond {n_shared}")));
                }
                shared[g] = w[l];
            }
        }
        local[k] = w;
        duals[k] = nu;
    }
    Ok(TreeQpSolution {
        shared,
        local,
        duals,
        factor_orders: elims.iter().map(|e| e.as_ref().map_or(0, |e| e.order())).collect(),
        messages: messages.into_iter().map(|m| m.expect("every agent sent")).collect(),
    })
}
