use crate::error::{Error, Result};
use crate::graphcore::CliqueTree;
use crate::relaxation::CoupledSdp;
use crate::scalar::Scalar;

/// One agent of the message-passing tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Sensors shared with the parent clique (`U_k`), empty at the root.
    pub shared_sensors: Vec<usize>,
    /// Global `y` coordinates shared with the parent, sorted.
    pub separator: Vec<usize>,
    /// Variables of the local QP, `n_k`.
    pub n_vars: usize,
    /// Equality rows of the local QP, `e_k`.
    pub n_eq: usize,
}

impl AgentNode {
    /// `s_k`.
    pub fn s(&self) -> usize {
        self.separator.len()
    }

    /// `r_k = n_k − s_k`.
    pub fn r(&self) -> usize {
        self.n_vars - self.s()
    }

    /// Order of the matrix factorized by this agent in a direction pass.
    pub fn factor_order(&self) -> usize {
        self.r() + self.n_eq
    }

    /// Scalars in the upward quadratic message, `s(s+1)/2 + s`.
    pub fn message_payload(&self) -> usize {
        let s = self.s();
        s * (s + 1) / 2 + s
    }
}

/// Rooted tree of agents with the coordinates each one shares upward.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentTree {
    nodes: Vec<AgentNode>,
    root: usize,
    postorder: Vec<usize>,
    height: usize,
}

impl AgentTree {
    /// Tree from parent links. `separators[k]` lists the global coordinates
    /// agent `k` shares with its parent; `n_vars`/`n_eq` size its local QP.
    pub fn new(
        parents: &[Option<usize>],
        separators: Vec<Vec<usize>>,
        n_vars: &[usize],
        n_eq: &[usize],
    ) -> Result<Self> {
        let q = parents.len();
        if separators.len() != q || n_vars.len() != q || n_eq.len() != q {
            return Err(Error::DimensionMismatch(format!("agent tree with {q} parents but mismatched sizes")));
        }
        let roots: Vec<usize> = (0..q).filter(|&k| parents[k].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidTree(format!("{} roots", roots.len())));
        }
        let root = roots[0];
        let mut children = vec![Vec::new(); q];
        for (k, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                if p >= q || p == k {
                    return Err(Error::InvalidTree(format!("bad parent {p} of agent {k}")));
                }
                children[p].push(k);
            }
        }
        let mut nodes = Vec::with_capacity(q);
        for (k, mut sep) in separators.into_iter().enumerate() {
            sep.sort_unstable();
            sep.dedup();
            if parents[k].is_none() && !sep.is_empty() {
                return Err(Error::IndexInconsistency("root has a separator".into()));
            }
            if sep.len() > n_vars[k] {
                return Err(Error::IndexInconsistency(format!("agent {k} separator larger than its QP")));
            }
            nodes.push(AgentNode {
                id: k,
                parent: parents[k],
                children: std::mem::take(&mut children[k]),
                shared_sensors: Vec::new(),
                separator: sep,
                n_vars: n_vars[k],
                n_eq: n_eq[k],
            });
        }
        // depth-first from the root; unreachable agents mean a cycle or forest
        let mut pre = Vec::with_capacity(q);
        let mut depth = vec![0; q];
        let mut stack = vec![root];
        while let Some(k) = stack.pop() {
            pre.push(k);
            for &c in nodes[k].children.iter().rev() {
                depth[c] = depth[k] + 1;
                stack.push(c);
            }
        }
        if pre.len() != q {
            return Err(Error::InvalidTree("parent links do not form a single tree".into()));
        }
        let height = depth.iter().copied().max().unwrap_or(0);
        let mut postorder = Vec::with_capacity(q);
        post(&nodes, root, &mut postorder);
        Ok(AgentTree { nodes, root, postorder, height })
    }

    pub fn nodes(&self) -> &[AgentNode] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> &AgentNode {
        &self.nodes[k]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Longest root-to-leaf path, in edges.
    pub fn height(&self) -> usize {
        self.height
    }

    /// Children before parents; siblings in ascending order.
    pub fn postorder(&self) -> &[usize] {
        &self.postorder
    }

    pub fn preorder(&self) -> Vec<usize> {
        self.postorder.iter().rev().copied().collect()
    }
}

fn post(nodes: &[AgentNode], k: usize, out: &mut Vec<usize>) {
    for &c in &nodes[k].children {
        post(nodes, c, out);
    }
    out.push(k);
}

/// Agents of the coupled problem on the clique tree it was built from.
pub fn build_agent_tree<T: Scalar>(tree: &CliqueTree, sdp: &CoupledSdp<T>) -> Result<AgentTree> {
    if tree.len() != sdp.agents.len() {
        return Err(Error::IndexInconsistency(format!(
            "{} cliques but {} subproblems",
            tree.len(),
            sdp.agents.len()
        )));
    }
    let mut separators = Vec::with_capacity(tree.len());
    for (k, a) in sdp.agents.iter().enumerate() {
        if a.agent != k || a.clique != tree.cliques()[k] {
            return Err(Error::IndexInconsistency(format!("subproblem {k} does not belong to clique {k}")));
        }
        let sep = match tree.parent(k) {
            None => Vec::new(),
            Some(p) => {
                let coords = sdp.index.separator_coordinates(tree.separator(k))?;
                for &g in &coords {
                    if a.support.binary_search(&g).is_err() || sdp.agents[p].support.binary_search(&g).is_err() {
                        return Err(Error::IndexInconsistency(format!(
                            "separator coordinate {g} of agent {} missing from a support",
                            k + 1
                        )));
                    }
                }
                coords
            }
        };
        separators.push(sep);
    }
    let n_vars: Vec<usize> = sdp.agents.iter().map(|a| a.n_vars()).collect();
    let n_eq: Vec<usize> = sdp.agents.iter().map(|a| a.n_eq()).collect();
    let mut out = AgentTree::new(tree.parents(), separators, &n_vars, &n_eq)?;
    for node in &mut out.nodes {
        node.shared_sensors = tree.separator(node.id).to_vec();
    }
    Ok(out)
}
