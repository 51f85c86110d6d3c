use nalgebra::DVector;

use super::tree::AgentTree;
use crate::pdipm::{step_from_bound, StepBounds};
use crate::scalar::Scalar;

/// `(messages, scalars)` each agent sent upward and downward in one pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PassTraffic {
    pub up: Vec<(usize, usize)>,
    pub down: Vec<(usize, usize)>,
}

impl PassTraffic {
    /// Every non-root agent sends `up(k)` scalars to its parent and every
    /// agent sends `down` scalars to each child.
    pub fn of(tree: &AgentTree, up: impl Fn(usize) -> usize, down: usize) -> Self {
        let nodes = tree.nodes();
        PassTraffic {
            up: nodes.iter().map(|n| if n.parent.is_some() { (1, up(n.id)) } else { (0, 0) }).collect(),
            down: nodes.iter().map(|n| (n.children.len(), n.children.len() * down)).collect(),
        }
    }
}

/// Min-reduce the agents' boundary distances to the root, apply
/// `t = min(1, γ · bound)` there and broadcast `(t_p, t_d)`.
pub fn reduce_step_sizes<T: Scalar>(tree: &AgentTree, bounds: &[StepBounds<T>], gamma: T) -> ((T, T), PassTraffic) {
    let mut acc = bounds.to_vec();
    for &k in tree.postorder() {
        for &c in &tree.node(k).children {
            acc[k] = acc[k].merge(acc[c]);
        }
    }
    let total = acc[tree.root()];
    let t = (step_from_bound(total.primal, gamma), step_from_bound(total.dual, gamma));
    (t, PassTraffic::of(tree, |_| 2, 2))
}

/// What an agent contributes to the perturbation/termination pass.
#[derive(Clone, Debug, PartialEq)]
pub struct TerminationInput<T: Scalar> {
    /// `⟨X,Z⟩ + λᵀ(g − Dy)` of the agent.
    pub complementarity: T,
    pub primal_sq: T,
    pub primal_lin_sq: T,
    pub dual_sq: T,
    /// The agent's share of the `y` dual residual, over its support.
    pub dual_lin_share: DVector<T>,
    pub support: Vec<usize>,
}

/// Network totals known at the root after the upward sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TerminationTotals<T> {
    pub complementarity: T,
    pub primal_sq: T,
    pub primal_lin_sq: T,
    pub dual_sq: T,
    pub dual_lin_sq: T,
}

/// Sum-reduce the termination quantities. Shares of the `y` dual residual
/// on separator coordinates travel upward until they reach the agent that
/// eliminates the coordinate, which squares the completed value.
/// Upward payload: 5 scalars plus `s_k` shares; downward: `δ` and the
/// stop flag.
pub fn reduce_termination<T: Scalar>(
    tree: &AgentTree,
    inputs: &[TerminationInput<T>],
) -> (TerminationTotals<T>, PassTraffic) {
    let q = tree.len();
    let mut totals: Vec<Option<TerminationTotals<T>>> = vec![None; q];
    let mut sent: Vec<DVector<T>> = vec![DVector::zeros(0); q];
    for &k in tree.postorder() {
        let node = tree.node(k);
        let inp = &inputs[k];
        let mut share = inp.dual_lin_share.clone();
        let mut t = TerminationTotals {
            complementarity: inp.complementarity,
            primal_sq: inp.primal_sq,
            primal_lin_sq: inp.primal_lin_sq,
            dual_sq: inp.dual_sq,
            dual_lin_sq: T::zero(),
        };
        for &c in &node.children {
            let ct = totals[c].expect("children precede parents");
            t.complementarity += ct.complementarity;
            t.primal_sq += ct.primal_sq;
            t.primal_lin_sq += ct.primal_lin_sq;
            t.dual_sq += ct.dual_sq;
            t.dual_lin_sq += ct.dual_lin_sq;
            for (a, &g) in tree.node(c).separator.iter().enumerate() {
                let l = inp.support.binary_search(&g).expect("child separator inside parent support");
                share[l] += sent[c][a];
            }
        }
        let mut up = Vec::with_capacity(node.separator.len());
        for (l, &g) in inp.support.iter().enumerate() {
            if node.separator.binary_search(&g).is_ok() {
                up.push(share[l]);
            } else {
                t.dual_lin_sq += share[l] * share[l];
            }
        }
        sent[k] = DVector::from_vec(up);
        totals[k] = Some(t);
    }
    let traffic = PassTraffic::of(tree, |k| 5 + tree.node(k).s(), 2);
    (totals[tree.root()].expect("root reduced"), traffic)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> AgentTree {
        AgentTree::new(&[None, Some(0), Some(1)], vec![vec![], vec![1], vec![2]], &[3, 3, 3], &[0, 0, 0]).unwrap()
    }

    #[test]
    fn step_reduction_takes_the_minimum() {
        let t = chain3();
        let b = |p: Option<f64>, d: Option<f64>| StepBounds { primal: p, dual: d };
        let ((tp, td), traffic) = reduce_step_sizes(&t, &[b(None, None), b(Some(0.5), None), b(Some(2.0), None)], 0.95);
        assert!((tp - 0.475).abs() < 1e-15);
        assert_eq!(td, 1.0);
        assert_eq!(traffic.up, vec![(0, 0), (1, 2), (1, 2)]);
        assert_eq!(traffic.down, vec![(1, 2), (1, 2), (0, 0)]);
        let ((tp, _), _) = reduce_step_sizes(&t, &[b(Some(1.0), None); 3], 0.95);
        assert!((tp - 0.95).abs() < 1e-15);
    }

    #[test]
    fn shared_residual_is_completed_before_squaring() {
        // coordinate 1 is shared by agents 0 and 1, coordinate 2 by 1 and 2
        let t = chain3();
        let inp = |support: Vec<usize>, share: Vec<f64>| TerminationInput {
            complementarity: 1.0,
            primal_sq: 1.0,
            primal_lin_sq: 0.0,
            dual_sq: 2.0,
            dual_lin_share: DVector::from_vec(share),
            support,
        };
        let inputs = vec![inp(vec![0, 1], vec![1.0, 1.0]), inp(vec![1, 2], vec![2.0, 3.0]), inp(vec![2, 3], vec![-3.0, 4.0])];
        let (tot, traffic) = reduce_termination(&t, &inputs);
        // completed residual (1, 3, 0, 4)
        assert_eq!(tot.dual_lin_sq, 1.0 + 9.0 + 0.0 + 16.0);
        assert_eq!(tot.complementarity, 3.0);
        assert_eq!(tot.dual_sq, 6.0);
        assert_eq!(traffic.up[2], (1, 6));
    }
}
