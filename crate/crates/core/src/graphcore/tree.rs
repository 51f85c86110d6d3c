use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{ChordalEmbedding, Graph};

/// Maximal clique as a sorted vertex list.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Clique(Vec<usize>);

impl Clique {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Clique(members)
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn intersection(&self, other: &Clique) -> Vec<usize> {
        self.0.iter().copied().filter(|&v| other.contains(v)).collect()
    }

    pub fn is_subset_of(&self, other: &Clique) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }
}

impl<const N: usize> From<[usize; N]> for Clique {
    fn from(v: [usize; N]) -> Self {
        Clique::new(v.to_vec())
    }
}

/// Maximal cliques of a chordal embedding, sorted lexicographically.
pub fn enumerate_cliques(e: &ChordalEmbedding) -> Result<Vec<Clique>> {
    let g = e.graph();
    let n = g.n_vertices();
    if e.peo.len() != n {
        return Err(Error::InvalidPeo(format!("ordering has {} entries for {n} vertices", e.peo.len())));
    }
    let mut pos = vec![usize::MAX; n];
    for (p, &v) in e.peo.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return Err(Error::InvalidPeo(format!("vertex {} repeated or out of range", v + 1)));
        }
        pos[v] = p;
    }
    let mut candidates: Vec<Clique> = Vec::with_capacity(n);
    for &v in &e.peo {
        let mut members: Vec<usize> = g.neighbors(v).filter(|&u| pos[u] > pos[v]).collect();
        if !g.is_complete_on(&members) {
            return Err(Error::InvalidPeo(format!("later neighbours of vertex {} are not a clique", v + 1)));
        }
        members.push(v);
        candidates.push(Clique::new(members));
    }
    let mut maximal: Vec<Clique> = candidates
        .iter()
        .filter(|c| !candidates.iter().any(|o| o.len() > c.len() && c.is_subset_of(o)))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    maximal.sort();
    Ok(maximal)
}

/// Rooted tree over cliques with cached separators `S_k = C_k ∩ C_parent(k)`
/// and residuals `R_k = C_k \ S_k` (the root's separator is empty).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueTree {
    cliques: Vec<Clique>,
    parent: Vec<Option<usize>>,
    root: usize,
    separators: Vec<Vec<usize>>,
    residuals: Vec<Vec<usize>>,
}

impl CliqueTree {
    /// Assembles a tree from a parent map, checking it is a single rooted tree.
    /// The clique-intersection property is not checked here; see [`verify_cip`].
    pub fn from_parts(cliques: Vec<Clique>, parent: Vec<Option<usize>>) -> Result<Self> {
        let q = cliques.len();
        if q == 0 || parent.len() != q {
            return Err(Error::InvalidTree("parent map does not match clique count".into()));
        }
        let roots: Vec<usize> = (0..q).filter(|&k| parent[k].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::InvalidTree(format!("expected one root, found {}", roots.len())));
        }
        for k in 0..q {
            // every node must reach the root within q steps
            let mut cur = k;
            let mut steps = 0;
            while let Some(p) = parent[cur] {
                if p >= q || steps > q {
                    return Err(Error::InvalidTree(format!("node {} does not reach the root", k + 1)));
                }
                cur = p;
                steps += 1;
            }
        }
        let separators: Vec<Vec<usize>> = (0..q)
            .map(|k| parent[k].map_or_else(Vec::new, |p| cliques[k].intersection(&cliques[p])))
            .collect();
        let residuals = (0..q)
            .map(|k| cliques[k].members().iter().copied().filter(|v| !separators[k].contains(v)).collect())
            .collect();
        Ok(CliqueTree { cliques, parent, root: roots[0], separators, residuals })
    }

    pub fn cliques(&self) -> &[Clique] {
        &self.cliques
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, k: usize) -> Option<usize> {
        self.parent[k]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    /// Children in ascending index order.
    pub fn children(&self, k: usize) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.parent[c] == Some(k)).collect()
    }

    pub fn separator(&self, k: usize) -> &[usize] {
        &self.separators[k]
    }

    pub fn residual(&self, k: usize) -> &[usize] {
        &self.residuals[k]
    }

    pub fn depth(&self, k: usize) -> usize {
        let mut d = 0;
        let mut cur = k;
        while let Some(p) = self.parent[cur] {
            d += 1;
            cur = p;
        }
        d
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        (0..self.len()).map(|k| self.depth(k)).max().unwrap_or(0)
    }

    /// Children before parents; siblings in ascending order.
    pub fn postorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        self.visit_post(self.root, &mut out);
        out
    }

    fn visit_post(&self, k: usize, out: &mut Vec<usize>) {
        for c in self.children(k) {
            self.visit_post(c, out);
        }
        out.push(k);
    }

    /// Parents before children.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = self.postorder();
        out.reverse();
        out
    }

    /// Node sequence of the tree path from `i` to `j`, both inclusive.
    pub fn path(&self, i: usize, j: usize) -> Vec<usize> {
        let ancestors = |mut k: usize| {
            let mut v = vec![k];
            while let Some(p) = self.parent[k] {
                v.push(p);
                k = p;
            }
            v
        };
        let up_i = ancestors(i);
        let up_j = ancestors(j);
        let meet = *up_i.iter().find(|a| up_j.contains(a)).expect("nodes share the root");
        let mut path: Vec<usize> = up_i.iter().copied().take_while(|&a| a != meet).collect();
        path.push(meet);
        let tail: Vec<usize> = up_j.iter().copied().take_while(|&a| a != meet).collect();
        path.extend(tail.into_iter().rev());
        path
    }

    /// Same tree re-hung from `root`.
    pub fn rerooted(&self, root: usize) -> Result<Self> {
        if root >= self.len() {
            return Err(Error::InvalidTree(format!("root {} out of range", root + 1)));
        }
        let mut parent = self.parent.clone();
        let mut prev = None;
        let mut cur = Some(root);
        while let Some(k) = cur {
            let next = parent[k];
            parent[k] = prev;
            prev = Some(k);
            cur = next;
        }
        Self::from_parts(self.cliques.clone(), parent)
    }

    /// Graph whose edges are the tree edges (one vertex per clique).
    pub fn tree_graph(&self) -> Graph {
        Graph::from_edges(self.len(), (0..self.len()).filter_map(|k| self.parent[k].map(|p| (k, p))))
    }
}

/// Default root: largest clique, lowest index on ties.
pub fn default_root(cliques: &[Clique]) -> usize {
    cliques
        .iter()
        .enumerate()
        .max_by(|(a, ca), (b, cb)| ca.len().cmp(&cb.len()).then(b.cmp(a)))
        .map_or(0, |(k, _)| k)
}

/// Maximum-weight spanning tree of the clique graph (weights `|C_i ∩ C_j|`),
/// grown by Prim from the default root.
pub fn build_clique_tree(cliques: Vec<Clique>) -> Result<CliqueTree> {
    let root = default_root(&cliques);
    build_clique_tree_rooted(cliques, root)
}

/// As [`build_clique_tree`] but grown from a caller-chosen root.
///
/// Ties pick the lowest-index clique to attach next; a clique keeps the
/// earliest tree node offering its best weight as parent.
pub fn build_clique_tree_rooted(cliques: Vec<Clique>, root: usize) -> Result<CliqueTree> {
    let q = cliques.len();
    if q == 0 {
        return Err(Error::InvalidTree("no cliques".into()));
    }
    if root >= q {
        return Err(Error::InvalidTree(format!("root {} out of range", root + 1)));
    }
    let weight = |a: usize, b: usize| cliques[a].intersection(&cliques[b]).len();
    let mut in_tree = vec![false; q];
    let mut best = vec![0usize; q];
    let mut parent: Vec<Option<usize>> = vec![None; q];
    in_tree[root] = true;
    for k in 0..q {
        if k != root {
            best[k] = weight(k, root);
            parent[k] = Some(root);
        }
    }
    for _ in 1..q {
        let next = (0..q)
            .filter(|&k| !in_tree[k])
            .max_by(|&a, &b| best[a].cmp(&best[b]).then(b.cmp(&a)))
            .expect("clique outside tree");
        if best[next] == 0 {
            return Err(Error::DisconnectedCliques);
        }
        in_tree[next] = true;
        for k in 0..q {
            if !in_tree[k] {
                let w = weight(k, next);
                if w > best[k] {
                    best[k] = w;
                    parent[k] = Some(next);
                }
            }
        }
    }
    CliqueTree::from_parts(cliques, parent)
}

/// Clique-intersection property: `C_i ∩ C_j` lies in every clique on the path.
pub fn verify_cip(t: &CliqueTree) -> bool {
    let q = t.len();
    for i in 0..q {
        for j in i + 1..q {
            let common = t.cliques[i].intersection(&t.cliques[j]);
            if common.is_empty() {
                continue;
            }
            for k in t.path(i, j) {
                if !common.iter().all(|&v| t.cliques[k].contains(v)) {
                    return false;
                }
            }
        }
    }
    true
}
