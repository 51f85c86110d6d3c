//! Decomposed convex relaxation: measurement assignment, the global variable
//! index and each agent's standard-form subproblem.

mod assignment;
mod index;
mod subproblem;

pub use assignment::{assign_measurements, Assignment};
pub use index::{GlobalVariableIndex, Var};
pub use subproblem::{
    add_trace_regularization, build_subproblems, extract_positions, summarize, AgentSubproblem, AgentSummary,
    BlockKind, BlockSpec, CoupledSdp, Regularization,
};

use crate::error::{Error, Result};
use crate::graphcore::{build_clique_tree_rooted, chordal_embed, default_root, enumerate_cliques, ChordalEmbedding, CliqueTree};
use crate::scalar::Scalar;
use crate::scenario::NetworkScenario;

/// Clique-tree root selection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RootChoice {
    /// Largest clique, lowest index on ties.
    #[default]
    Auto,
    /// 0-based clique index.
    Clique(usize),
}

/// Everything built from a scenario before solving.
#[derive(Clone, Debug)]
pub struct LocalizationProblem<T: Scalar> {
    pub embedding: ChordalEmbedding,
    pub tree: CliqueTree,
    pub assignment: Assignment,
    pub sdp: CoupledSdp<T>,
}

impl<T: Scalar> LocalizationProblem<T> {
    pub fn new(scn: &NetworkScenario, root: RootChoice) -> Result<Self> {
        scn.validate()?;
        let embedding = chordal_embed(&scn.range_graph())?;
        let cliques = enumerate_cliques(&embedding)?;
        let root = match root {
            RootChoice::Auto => default_root(&cliques),
            RootChoice::Clique(r) if r < cliques.len() => r,
            RootChoice::Clique(r) => {
                return Err(Error::InvalidTree(format!("root {} out of range ({} cliques)", r, cliques.len())))
            }
        };
        let tree = build_clique_tree_rooted(cliques, root)?;
        let assignment = assign_measurements(&tree, scn)?;
        let sdp = build_subproblems(&tree, &assignment, scn)?;
        Ok(LocalizationProblem { embedding, tree, assignment, sdp })
    }

    pub fn with_regularization(mut self, reg: &Regularization) -> Result<Self> {
        add_trace_regularization(&mut self.sdp, reg)?;
        Ok(self)
    }
}

/// Variable count of an agent with clique size `c`, `b` ranges and `a`
/// anchor measurements: `c(c+1)/2 + 2b + dc + 2a + (c+d)(c+d+1)/2 + 3b + 3a`.
pub fn formula_n_k(d: usize, c: usize, b: usize, a: usize) -> usize {
    c * (c + 1) / 2 + 2 * b + d * c + 2 * a + (c + d) * (c + d + 1) / 2 + 3 * b + 3 * a
}

/// Equality count `4b + 4a + (c+d)(c+d+1)/2`.
pub fn formula_e_k(d: usize, c: usize, b: usize, a: usize) -> usize {
    4 * b + 4 * a + (c + d) * (c + d + 1) / 2
}

/// Coordinates shared with the parent for a separator of `u` sensors.
pub fn formula_s_k(d: usize, u: usize) -> usize {
    d * u + u * (u + 1) / 2
}
