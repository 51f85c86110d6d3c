use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::assignment::Assignment;
use super::index::GlobalVariableIndex;
use crate::error::{Error, Result};
use crate::graphcore::{Clique, CliqueTree};
use crate::scalar::Scalar;
use crate::scenario::NetworkScenario;
use crate::sdplinalg::{svec_index, svec_len};

/// Matrix variable kinds of one agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BlockKind {
    /// `[[I_d, X E_Cᵀ], [E_C Xᵀ, S_CC]]`.
    Gram,
    /// `[[1, D], [D, Λ]]` for range measurement `m`.
    Range(usize),
    /// `[[1, Z], [Z, Ξ]]` for anchor measurement `m`.
    Anchor(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BlockSpec {
    pub kind: BlockKind,
    pub order: usize,
    /// First slot of this block in the agent's stacked `x` (and first row of
    /// its defining equalities).
    pub offset: usize,
}

impl BlockSpec {
    pub fn len(&self) -> usize {
        svec_len(self.order)
    }

    pub fn is_empty(&self) -> bool {
        self.order == 0
    }
}

/// One agent's piece of the coupled problem in standard form
///
/// ```text
/// min  cost_yᵀ y_J + cost_xᵀ x + offset
/// s.t. q x + w y_J = b,   a y_J = a_rhs,   d y_J <= g,   X_j ⪰ 0
/// ```
///
/// where `y_J` is `y` restricted to [`AgentSubproblem::support`].
#[derive(Clone, Debug, PartialEq)]
pub struct AgentSubproblem<T: Scalar> {
    pub agent: usize,
    pub clique: Clique,
    /// Global coordinates `J_k`, ascending; local column `p` is `support[p]`.
    pub support: Vec<usize>,
    pub blocks: Vec<BlockSpec>,
    pub q: DMatrix<T>,
    pub w: DMatrix<T>,
    pub b: DVector<T>,
    pub a: DMatrix<T>,
    pub a_rhs: DVector<T>,
    pub d: DMatrix<T>,
    pub g: DVector<T>,
    pub cost_y: DVector<T>,
    pub cost_x: DVector<T>,
    pub offset: T,
    /// Range measurement numbers owned by this agent.
    pub ranges: Vec<usize>,
    /// Anchor measurement numbers owned by this agent.
    pub anchor_meas: Vec<usize>,
}

impl<T: Scalar> AgentSubproblem<T> {
    pub fn n_x(&self) -> usize {
        self.q.ncols()
    }

    /// Variables of the subproblem, `|J_k| + dim x^k`.
    pub fn n_vars(&self) -> usize {
        self.support.len() + self.n_x()
    }

    /// Equality rows, coupling plus linear.
    pub fn n_eq(&self) -> usize {
        self.b.len() + self.a_rhs.len()
    }

    pub fn n_ineq(&self) -> usize {
        self.g.len()
    }

    pub fn block_order_sum(&self) -> usize {
        self.blocks.iter().map(|b| b.order).sum()
    }

    pub fn local_col(&self, global: usize) -> Option<usize> {
        self.support.binary_search(&global).ok()
    }

    pub fn gather(&self, y: &DVector<T>) -> DVector<T> {
        DVector::from_iterator(self.support.len(), self.support.iter().map(|&g| y[g]))
    }

    pub fn block_matrix(&self, x: &DVector<T>, blk: &BlockSpec) -> DMatrix<T> {
        let v = x.rows(blk.offset, blk.len()).into_owned();
        crate::sdplinalg::smat(&v).expect("block length is a triangular number")
    }

    /// Local objective `cost_yᵀ y_J + cost_xᵀ x + offset`.
    pub fn objective(&self, y: &DVector<T>, x: &DVector<T>) -> T {
        self.cost_y.dot(&self.gather(y)) + self.cost_x.dot(x) + self.offset
    }
}

/// All agents' subproblems over a shared variable index.
#[derive(Clone, Debug)]
pub struct CoupledSdp<T: Scalar> {
    pub index: GlobalVariableIndex,
    pub agents: Vec<AgentSubproblem<T>>,
    /// Measured range per range-measurement number.
    pub range_values: Vec<T>,
    /// Measured range per anchor-measurement number.
    pub anchor_values: Vec<T>,
    /// Factor applied to every stored cost and offset (the smallest
    /// measurement variance), so the weights seen by the solver are O(1).
    /// `objective` and `offset` undo it.
    pub cost_scale: T,
}

impl<T: Scalar> CoupledSdp<T> {
    pub fn n_y(&self) -> usize {
        self.index.n_y()
    }

    /// Coupled problem from hand-built agents over `n_y` shared coordinates,
    /// with unit cost scale. Checks that the pieces fit together.
    pub fn from_agents(agents: Vec<AgentSubproblem<T>>, n_y: usize) -> Result<Self> {
        for (k, a) in agents.iter().enumerate() {
            let bad = |m: &str| Err(Error::DimensionMismatch(format!("agent {}: {m}", k + 1)));
            if a.agent != k {
                return bad("agents out of order");
            }
            if a.support.windows(2).any(|w| w[0] >= w[1]) || a.support.last().is_some_and(|&g| g >= n_y) {
                return bad("support not ascending inside 0..n_y");
            }
            let (nj, nx) = (a.support.len(), a.n_x());
            if a.q.nrows() != a.b.len() || a.w.shape() != (a.b.len(), nj) || a.cost_x.len() != nx {
                return bad("coupling rows");
            }
            if a.a.shape() != (a.a_rhs.len(), nj) || a.d.shape() != (a.g.len(), nj) || a.cost_y.len() != nj {
                return bad("linear rows");
            }
            let mut off = 0;
            for blk in &a.blocks {
                if blk.offset != off {
                    return bad("blocks do not tile x");
                }
                off += blk.len();
            }
            if off != nx {
                return bad("blocks do not tile x");
            }
        }
        let supports = agents.iter().map(|a| a.support.clone()).collect();
        Ok(CoupledSdp {
            index: GlobalVariableIndex::untyped(n_y, supports),
            agents,
            range_values: Vec::new(),
            anchor_values: Vec::new(),
            cost_scale: T::one(),
        })
    }

    /// Objective in the original (unscaled) units.
    pub fn objective(&self, y: &DVector<T>, xs: &[DVector<T>]) -> T {
        self.scaled_objective(y, xs) / self.cost_scale
    }

    /// Objective of the problem the solver actually sees.
    pub fn scaled_objective(&self, y: &DVector<T>, xs: &[DVector<T>]) -> T {
        self.agents.iter().zip(xs).fold(T::zero(), |s, (a, x)| s + a.objective(y, x))
    }

    /// Sum of per-agent constant offsets, unscaled.
    pub fn offset(&self) -> T {
        self.agents.iter().fold(T::zero(), |s, a| s + a.offset) / self.cost_scale
    }

    /// `‖(b^1, b̄^1, …, b^q, b̄^q)‖₂`.
    pub fn rhs_norm(&self) -> T {
        self.agents
            .iter()
            .fold(T::zero(), |s, a| s + a.b.norm_squared() + a.a_rhs.norm_squared())
            .sqrt()
    }

    /// Matrix variables `x^k` implied by `y` through the defining equalities.
    pub fn implied_x(&self, y: &DVector<T>) -> Vec<DVector<T>> {
        // q is the identity for every agent built here
        self.agents.iter().map(|a| &a.b - &a.w * a.gather(y)).collect()
    }

    /// `y` of the rank-`d` point built from sensor positions: `S = XᵀX` on the
    /// pattern, `D` and `Z` the exact distances, `Λ = D²`, `Ξ = Z²`.
    pub fn lift_positions(&self, positions: &[Vec<T>], anchors: &[Vec<T>]) -> DVector<T> {
        let ix = &self.index;
        let mut y = DVector::zeros(ix.n_y());
        for (i, p) in positions.iter().enumerate() {
            for (c, &v) in p.iter().enumerate() {
                y[ix.position(i, c)] = v;
            }
        }
        let dot = |a: &[T], b: &[T]| a.iter().zip(b).fold(T::zero(), |s, (&u, &v)| s + u * v);
        for &(i, j) in ix.gram_pattern() {
            y[ix.gram(i, j).unwrap()] = dot(&positions[i], &positions[j]);
        }
        for (m, &(i, j)) in ix.ranges().iter().enumerate() {
            let dd = crate::graphcore::distance(&positions[i], &positions[j]);
            y[ix.dist(m)] = dd;
            y[ix.lambda(m)] = dd * dd;
        }
        for (m, &(i, a)) in ix.anchor_pairs().iter().enumerate() {
            let dd = crate::graphcore::distance(&positions[i], &anchors[a]);
            y[ix.anchor_dist(m)] = dd;
            y[ix.xi(m)] = dd * dd;
        }
        y
    }
}

/// Lower the relaxation onto the agents of `tree`.
///
/// Agent `k` holds the Gram block of its clique, a `(Γ, Λ-equation,
/// D >= 0, cost)` group per owned range and a `(Φ, Ξ-equation, Z >= 0, cost)`
/// group per owned anchor measurement. Constants `R²/σ²`, `Y²/σ²` go to the
/// agent's offset.
pub fn build_subproblems<T: Scalar>(
    tree: &CliqueTree,
    assignment: &Assignment,
    scn: &NetworkScenario,
) -> Result<CoupledSdp<T>> {
    if assignment.phi.len() != tree.len() || assignment.phi_bar.len() != tree.len() {
        return Err(Error::Assignment("assignment does not match the clique tree".into()));
    }
    let mut index = GlobalVariableIndex::new(tree, scn);
    let d = scn.dim;
    let mut range_values = vec![T::zero(); index.ranges().len()];
    let mut range_var = vec![1.0; index.ranges().len()];
    for m in &scn.range_measurements {
        let k = index.range_number(m.i, m.j).expect("indexed");
        range_values[k] = T::lit(m.r);
        range_var[k] = m.var;
    }
    let mut anchor_values = vec![T::zero(); index.anchor_pairs().len()];
    let mut anchor_var = vec![1.0; index.anchor_pairs().len()];
    for m in &scn.anchor_measurements {
        let k = index.anchor_number(m.i, m.j).expect("indexed");
        anchor_values[k] = T::lit(m.y);
        anchor_var[k] = m.var;
    }
    let min_var = range_var.iter().chain(&anchor_var).copied().fold(f64::INFINITY, f64::min);
    let cost_scale = if min_var.is_finite() { min_var } else { 1.0 };
    let sqrt2 = T::lit(2.0).sqrt();
    let mut agents = Vec::with_capacity(tree.len());
    for (k, clique) in tree.cliques().iter().enumerate() {
        let members = clique.members();
        for &(i, j) in &assignment.phi[k] {
            if !clique.contains(i) || !clique.contains(j) {
                return Err(Error::Assignment(format!("pair ({}, {}) outside clique {}", i + 1, j + 1, k + 1)));
            }
        }
        let ranges: Vec<usize> = assignment.phi[k]
            .iter()
            .map(|&(i, j)| {
                index.range_number(i, j).ok_or_else(|| {
                    Error::Assignment(format!("pair ({}, {}) has no measurement", i + 1, j + 1))
                })
            })
            .collect::<Result<_>>()?;
        let mut anchor_meas = Vec::new();
        for &i in &assignment.phi_bar[k] {
            if !clique.contains(i) {
                return Err(Error::Assignment(format!("sensor {} outside clique {}", i + 1, k + 1)));
            }
            anchor_meas.extend(
                index.anchor_pairs().iter().enumerate().filter(|(_, p)| p.0 == i).map(|(m, _)| m),
            );
        }

        let mut support = Vec::new();
        for &i in members {
            support.extend((0..d).map(|c| index.position(i, c)));
        }
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a..] {
                support.push(index.gram(i, j).expect("clique pairs are in the pattern"));
            }
        }
        for &m in &ranges {
            support.extend([index.lambda(m), index.dist(m)]);
        }
        for &m in &anchor_meas {
            support.extend([index.xi(m), index.anchor_dist(m)]);
        }
        index.set_support(k, support);
        let support = index.support(k).to_vec();
        let col = |g: usize| support.binary_search(&g).expect("coordinate in support");

        let t_order = d + members.len();
        let mut blocks = vec![BlockSpec { kind: BlockKind::Gram, order: t_order, offset: 0 }];
        let mut off = svec_len(t_order);
        for &m in &ranges {
            blocks.push(BlockSpec { kind: BlockKind::Range(m), order: 2, offset: off });
            off += 3;
        }
        for &m in &anchor_meas {
            blocks.push(BlockSpec { kind: BlockKind::Anchor(m), order: 2, offset: off });
            off += 3;
        }
        let n_x = off;
        let n_j = support.len();
        let mut w = DMatrix::zeros(n_x, n_j);
        let mut b = DVector::zeros(n_x);
        for c in 0..t_order {
            for r in c..t_order {
                let row = svec_index(t_order, r, c);
                let scale = if r == c { T::one() } else { sqrt2 };
                if r < d {
                    b[row] = if r == c { T::one() } else { T::zero() };
                } else if c < d {
                    w[(row, col(index.position(members[r - d], c)))] = -scale;
                } else {
                    let g = index.gram(members[r - d], members[c - d]).unwrap();
                    w[(row, col(g))] = -scale;
                }
            }
        }
        let n_lin = ranges.len() + anchor_meas.len();
        let mut a = DMatrix::zeros(n_lin, n_j);
        let mut a_rhs = DVector::zeros(n_lin);
        let mut dm = DMatrix::zeros(n_lin, n_j);
        let g = DVector::zeros(n_lin);
        let mut cost_y = DVector::zeros(n_j);
        let mut offset = T::zero();
        let mut row = 0;
        for (p, &m) in ranges.iter().enumerate() {
            let (i, j) = index.ranges()[m];
            let base = blocks[1 + p].offset;
            b[base] = T::one();
            w[(base + 1, col(index.dist(m)))] = -sqrt2;
            w[(base + 2, col(index.lambda(m)))] = -T::one();
            // Λ − S_ii − S_jj + 2 S_ij = 0
            a[(row, col(index.lambda(m)))] = T::one();
            a[(row, col(index.gram(i, i).unwrap()))] = -T::one();
            a[(row, col(index.gram(j, j).unwrap()))] = -T::one();
            a[(row, col(index.gram(i, j).unwrap()))] = T::lit(2.0);
            dm[(row, col(index.dist(m)))] = -T::one();
            let inv = T::lit(cost_scale / range_var[m]);
            let r = range_values[m];
            cost_y[col(index.lambda(m))] = inv;
            cost_y[col(index.dist(m))] = -T::lit(2.0) * r * inv;
            offset += r * r * inv;
            row += 1;
        }
        for (p, &m) in anchor_meas.iter().enumerate() {
            let (i, an) = index.anchor_pairs()[m];
            let base = blocks[1 + ranges.len() + p].offset;
            b[base] = T::one();
            w[(base + 1, col(index.anchor_dist(m)))] = -sqrt2;
            w[(base + 2, col(index.xi(m)))] = -T::one();
            // Ξ − S_ii + 2 x_iᵀa = ‖a‖²
            let pos: Vec<T> = scn.anchors[an].iter().map(|&v| T::lit(v)).collect();
            a[(row, col(index.xi(m)))] = T::one();
            a[(row, col(index.gram(i, i).unwrap()))] = -T::one();
            for (c, &v) in pos.iter().enumerate() {
                a[(row, col(index.position(i, c)))] = T::lit(2.0) * v;
            }
            a_rhs[row] = pos.iter().fold(T::zero(), |s, &v| s + v * v);
            dm[(row, col(index.anchor_dist(m)))] = -T::one();
            let inv = T::lit(cost_scale / anchor_var[m]);
            let yv = anchor_values[m];
            cost_y[col(index.xi(m))] = inv;
            cost_y[col(index.anchor_dist(m))] = -T::lit(2.0) * yv * inv;
            offset += yv * yv * inv;
            row += 1;
        }
        agents.push(AgentSubproblem {
            agent: k,
            clique: clique.clone(),
            support,
            blocks,
            q: DMatrix::identity(n_x, n_x),
            w,
            b,
            a,
            a_rhs,
            d: dm,
            g,
            cost_y,
            cost_x: DVector::zeros(n_x),
            offset,
            ranges,
            anchor_meas,
        });
    }
    Ok(CoupledSdp { index, agents, range_values, anchor_values, cost_scale: T::lit(cost_scale) })
}

/// Trace weights: `alpha` per agent Gram block, `rho` per range block and
/// `mu` per anchor block (uniform across the network).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Regularization {
    pub alpha: f64,
    pub rho: f64,
    pub mu: f64,
}

/// Add `α·tr(T^k) + Σ ρ·tr(Γ) + Σ μ·tr(Φ)` to the matrix-variable costs
/// (weights in objective units, scaled like every other cost).
pub fn add_trace_regularization<T: Scalar>(sdp: &mut CoupledSdp<T>, reg: &Regularization) -> Result<()> {
    for w in [reg.alpha, reg.rho, reg.mu] {
        if !(w >= 0.0) {
            return Err(Error::NegativeWeight(w));
        }
    }
    for agent in &mut sdp.agents {
        for blk in agent.blocks.clone() {
            let weight = sdp.cost_scale
                * T::lit(match blk.kind {
                    BlockKind::Gram => reg.alpha,
                    BlockKind::Range(_) => reg.rho,
                    BlockKind::Anchor(_) => reg.mu,
                });
            for i in 0..blk.order {
                agent.cost_x[blk.offset + svec_index(blk.order, i, i)] += weight;
            }
        }
    }
    Ok(())
}

/// Sensor positions stored in `y`.
pub fn extract_positions<T: Scalar>(index: &GlobalVariableIndex, y: &DVector<T>) -> Result<Vec<Vec<T>>> {
    if y.len() != index.n_y() {
        return Err(Error::DimensionMismatch(format!("y has {} entries, index expects {}", y.len(), index.n_y())));
    }
    Ok((0..index.n_sensors())
        .map(|i| (0..index.dim()).map(|c| y[index.position(i, c)]).collect())
        .collect())
}

/// Debug summary of one agent, serialised by the CLI dump option.
#[derive(Clone, Debug, Serialize)]
pub struct AgentSummary {
    pub agent: usize,
    pub clique: Vec<usize>,
    pub block_orders: Vec<usize>,
    pub coupling_rows: usize,
    pub linear_rows: usize,
    pub inequality_rows: usize,
    pub n_vars: usize,
    pub support: Vec<usize>,
    pub ranges: Vec<(usize, usize)>,
    pub anchor_measurements: Vec<(usize, usize)>,
}

pub fn summarize<T: Scalar>(sdp: &CoupledSdp<T>) -> Vec<AgentSummary> {
    sdp.agents
        .iter()
        .map(|a| AgentSummary {
            agent: a.agent,
            clique: a.clique.members().to_vec(),
            block_orders: a.blocks.iter().map(|b| b.order).collect(),
            coupling_rows: a.b.len(),
            linear_rows: a.a_rhs.len(),
            inequality_rows: a.g.len(),
            n_vars: a.n_vars(),
            support: a.support.clone(),
            ranges: a.ranges.iter().map(|&m| sdp.index.ranges()[m]).collect(),
            anchor_measurements: a.anchor_meas.iter().map(|&m| sdp.index.anchor_pairs()[m]).collect(),
        })
        .collect()
}
