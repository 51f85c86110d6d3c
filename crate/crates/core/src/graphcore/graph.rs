use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Simple undirected graph on vertices `0..n_vertices`.
///
/// Serializes to the JSON edge-list form `{"n_vertices": n, "edges": [[i, j], ...]}`
/// with `i < j` and edges in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EdgeList", into = "EdgeList")]
pub struct Graph {
    adj: Vec<BTreeSet<usize>>,
}

#[derive(Serialize, Deserialize)]
struct EdgeList {
    n_vertices: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<EdgeList> for Graph {
    type Error = Error;

    fn try_from(list: EdgeList) -> Result<Self> {
        let mut g = Graph::new(list.n_vertices);
        for [i, j] in list.edges {
            if i == j || i >= list.n_vertices || j >= list.n_vertices {
                return Err(Error::InvalidScenario(format!("bad edge ({}, {})", i + 1, j + 1)));
            }
            if !g.add_edge(i, j) {
                return Err(Error::InvalidScenario(format!("duplicate edge ({}, {})", i + 1, j + 1)));
            }
        }
        Ok(g)
    }
}

impl From<Graph> for EdgeList {
    fn from(g: Graph) -> Self {
        EdgeList { n_vertices: g.n_vertices(), edges: g.edges().map(|(i, j)| [i, j]).collect() }
    }
}

impl Graph {
    pub fn new(n_vertices: usize) -> Self {
        Graph { adj: vec![BTreeSet::new(); n_vertices] }
    }

    /// Builds a graph from an edge list; self-loops and duplicates are ignored.
    pub fn from_edges(n_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Graph::new(n_vertices);
        for (i, j) in edges {
            if i != j {
                g.add_edge(i, j);
            }
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        Self::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    pub fn n_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Inserts `(i, j)`; returns false when it already exists.
    ///
    /// Panics on a self-loop or an out-of-range vertex.
    pub fn add_edge(&mut self, i: usize, j: usize) -> bool {
        assert!(i != j, "self-loop at vertex {i}");
        let fresh = self.adj[i].insert(j);
        self.adj[j].insert(i);
        fresh
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj.get(i).is_some_and(|n| n.contains(&j))
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, n)| n.range(i + 1..).map(move |&j| (i, j)))
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n_vertices();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for u in self.neighbors(v) {
                    if !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                        queue.push_back(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// True for graphs with at most one component (the empty graph counts).
    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// True when `members` induces a complete subgraph.
    pub fn is_complete_on(&self, members: &[usize]) -> bool {
        members
            .iter()
            .enumerate()
            .all(|(a, &i)| members[a + 1..].iter().all(|&j| self.has_edge(i, j)))
    }
}

/// Disk-model measurement graph: sensors `i, j` are linked iff their distance
/// is strictly below `rc`; anchor `a` is listed for sensor `i` under the same rule.
pub fn build_measurement_graph<T: Scalar>(
    sensors: &[Vec<T>],
    anchors: &[Vec<T>],
    rc: T,
) -> Result<(Graph, Vec<Vec<usize>>)> {
    if rc < T::zero() {
        return Err(Error::InvalidScenario(format!("communication range {rc} is negative")));
    }
    let all_finite = sensors.iter().chain(anchors).flatten().all(|v| v.is_finite());
    if !all_finite {
        return Err(Error::InvalidScenario("non-finite position".into()));
    }
    let n = sensors.len();
    if rc == T::zero() {
        for i in 0..n {
            for j in i + 1..n {
                if distance(&sensors[i], &sensors[j]) == T::zero() {
                    return Err(Error::InvalidScenario(format!(
                        "sensors {} and {} coincide with zero communication range",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
    }
    let mut g = Graph::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if distance(&sensors[i], &sensors[j]) < rc {
                g.add_edge(i, j);
            }
        }
    }
    let anchor_adj = sensors
        .iter()
        .map(|p| (0..anchors.len()).filter(|&a| distance(p, &anchors[a]) < rc).collect())
        .collect();
    Ok((g, anchor_adj))
}

pub(crate) fn distance<T: Scalar>(p: &[T], q: &[T]) -> T {
    p.iter().zip(q).map(|(&a, &b)| (a - b) * (a - b)).fold(T::zero(), |s, v| s + v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn close_sensors_are_linked() {
        let s = vec![vec![0.0, 0.0], vec![0.1, 0.0]];
        let (g, a) = build_measurement_graph::<f64>(&s, &[], 0.2).unwrap();
        assert!(g.has_edge(0, 1));
        assert!(a.iter().all(Vec::is_empty));
    }

    #[test]
    fn far_sensors_are_not_linked() {
        let s = vec![vec![0.0, 0.0], vec![0.3, 0.0]];
        let (g, _) = build_measurement_graph::<f64>(&s, &[], 0.2).unwrap();
        assert_eq!(g.n_edges(), 0);
    }

    #[test]
    fn anchors_listed_by_range() {
        let s = vec![vec![0.0, 0.0]];
        let a = vec![vec![0.1, 0.0], vec![0.5, 0.5]];
        let (_, adj) = build_measurement_graph::<f64>(&s, &a, 0.2).unwrap();
        assert_eq!(adj, vec![vec![0]]);
    }

    #[test]
    fn coincident_sensors_with_zero_range_rejected() {
        let s = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        assert!(build_measurement_graph::<f64>(&s, &[], 0.0).is_err());
        assert!(build_measurement_graph::<f64>(&s, &[], 0.1).is_ok());
    }

    #[test]
    fn edge_list_json_roundtrip() {
        let g = Graph::from_edges(4, [(0, 1), (2, 1), (3, 0)]);
        let js = serde_json::to_string(&g).unwrap();
        assert_eq!(js, r#"{"n_vertices":4,"edges":[[0,1],[0,3],[1,2]]}"#);
        let back: Graph = serde_json::from_str(&js).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Graph>(r#"{"n_vertices":2,"edges":[[0,0]]}"#).is_err());
    }

    #[test]
    fn components_listed() {
        let g = Graph::from_edges(5, [(0, 1), (3, 4)]);
        assert_eq!(g.components(), vec![vec![0, 1], vec![2], vec![3, 4]]);
        assert!(!g.is_connected());
    }
}
