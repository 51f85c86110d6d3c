use std::collections::BTreeSet;

use crate::error::{Error, Result};

use super::Graph;

/// Chordal supergraph of `base` plus the elimination ordering that certifies it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChordalEmbedding {
    pub base: Graph,
    /// Added edges `(i, j)` with `i < j`, sorted; disjoint from `base`.
    pub fill_edges: Vec<(usize, usize)>,
    /// Perfect elimination ordering of the embedded graph.
    pub peo: Vec<usize>,
}

impl ChordalEmbedding {
    /// `base` together with the fill edges.
    pub fn graph(&self) -> Graph {
        let mut g = self.base.clone();
        for &(i, j) in &self.fill_edges {
            g.add_edge(i, j);
        }
        g
    }

    /// Wraps a graph that is already chordal, taking its MCS ordering.
    pub fn from_chordal(g: &Graph) -> Option<Self> {
        let (ok, peo) = is_chordal(g);
        ok.then(|| ChordalEmbedding { base: g.clone(), fill_edges: Vec::new(), peo: peo.unwrap() })
    }
}

/// Maximum cardinality search visit order (ties broken by lowest vertex id).
pub fn maximum_cardinality_search(g: &Graph) -> Vec<usize> {
    let n = g.n_vertices();
    let mut weight = vec![0usize; n];
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !done[v])
            .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
            .expect("unvisited vertex remains");
        done[v] = true;
        order.push(v);
        for u in g.neighbors(v) {
            if !done[u] {
                weight[u] += 1;
            }
        }
    }
    order
}

/// Checks that for every vertex its neighbours later in `order` form a clique.
pub fn is_perfect_elimination_ordering(g: &Graph, order: &[usize]) -> bool {
    let n = g.n_vertices();
    if order.len() != n {
        return false;
    }
    let mut pos = vec![usize::MAX; n];
    for (p, &v) in order.iter().enumerate() {
        if v >= n || pos[v] != usize::MAX {
            return false;
        }
        pos[v] = p;
    }
    for &v in order {
        let later: Vec<usize> = g.neighbors(v).filter(|&u| pos[u] > pos[v]).collect();
        let Some(&first) = later.iter().min_by_key(|&&u| pos[u]) else {
            continue;
        };
        if later.iter().any(|&u| u != first && !g.has_edge(first, u)) {
            return false;
        }
    }
    true
}

/// Chordality test: returns a perfect elimination ordering when one exists.
pub fn is_chordal(g: &Graph) -> (bool, Option<Vec<usize>>) {
    let mut peo = maximum_cardinality_search(g);
    peo.reverse();
    if is_perfect_elimination_ordering(g, &peo) {
        (true, Some(peo))
    } else {
        (false, None)
    }
}

/// Greedy minimum-degree triangulation of a connected graph.
///
/// The vertex of smallest current degree (lowest id on ties) is eliminated
/// repeatedly; its remaining neighbourhood is completed with fill edges.
pub fn chordal_embed(g: &Graph) -> Result<ChordalEmbedding> {
    if !g.is_connected() {
        return Err(Error::GraphNotConnected);
    }
    let n = g.n_vertices();
    let mut work: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).collect()).collect();
    let mut alive = vec![true; n];
    let mut peo = Vec::with_capacity(n);
    let mut fill = BTreeSet::new();
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (work[v].len(), v))
            .expect("live vertex remains");
        let nbrs: Vec<usize> = work[v].iter().copied().collect();
        for (a, &i) in nbrs.iter().enumerate() {
            for &j in &nbrs[a + 1..] {
                if work[i].insert(j) {
                    work[j].insert(i);
                    fill.insert((i.min(j), i.max(j)));
                }
            }
        }
        for &u in &nbrs {
            work[u].remove(&v);
        }
        alive[v] = false;
        peo.push(v);
    }
    Ok(ChordalEmbedding { base: g.clone(), fill_edges: fill.into_iter().collect(), peo })
}
