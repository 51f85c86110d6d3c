use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphcore::CliqueTree;
use crate::scenario::NetworkScenario;

/// Which agent owns each measurement.
///
/// `phi[k]` holds the inter-sensor pairs `(i, j)`, `i < j`, of agent `k`;
/// `phi_bar[k]` the sensors whose anchor measurements agent `k` owns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub phi: Vec<BTreeSet<(usize, usize)>>,
    pub phi_bar: Vec<BTreeSet<usize>>,
}

impl Assignment {
    /// Agent owning the range measurement `(i, j)`.
    pub fn owner_of_pair(&self, i: usize, j: usize) -> Option<usize> {
        let key = (i.min(j), i.max(j));
        self.phi.iter().position(|s| s.contains(&key))
    }

    /// Agent owning the anchor measurements of `sensor`.
    pub fn owner_of_anchor_set(&self, sensor: usize) -> Option<usize> {
        self.phi_bar.iter().position(|s| s.contains(&sensor))
    }
}

/// First-eligible-clique assignment: cliques in index order, members
/// ascending, neighbours ascending.
pub fn assign_measurements(tree: &CliqueTree, scn: &NetworkScenario) -> Result<Assignment> {
    let q = tree.len();
    let g = scn.range_graph();
    let anchored: BTreeSet<usize> = scn.anchor_measurements.iter().map(|m| m.i).collect();
    let mut phi = vec![BTreeSet::new(); q];
    let mut phi_bar = vec![BTreeSet::new(); q];
    let mut done_pairs = BTreeSet::new();
    let mut done_anchor = BTreeSet::new();
    for (k, clique) in tree.cliques().iter().enumerate() {
        for &i in clique.members() {
            for j in g.neighbors(i) {
                if i < j && clique.contains(j) && done_pairs.insert((i, j)) {
                    phi[k].insert((i, j));
                }
            }
            if anchored.contains(&i) && done_anchor.insert(i) {
                phi_bar[k].insert(i);
            }
        }
    }
    for (i, j) in g.edges() {
        if !done_pairs.contains(&(i, j)) {
            return Err(Error::Assignment(format!(
                "measurement ({}, {}) is not inside any clique",
                i + 1,
                j + 1
            )));
        }
    }
    if let Some(i) = anchored.iter().find(|i| !done_anchor.contains(i)) {
        return Err(Error::Assignment(format!("sensor {} is not in any clique", i + 1)));
    }
    Ok(Assignment { phi, phi_bar })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphcore::{Clique, CliqueTree};
    use crate::scenario::{AnchorMeasurement, RangeMeasurement};

    fn chain() -> (CliqueTree, NetworkScenario) {
        let t = CliqueTree::from_parts(vec![Clique::from([0, 1]), Clique::from([1, 2])], vec![None, Some(0)]).unwrap();
        let rm = |i, j| RangeMeasurement { i, j, r: 1.0, var: 1.0 };
        let scn = NetworkScenario {
            dim: 2,
            rc: 1.0,
            seed: 0,
            anchors: vec![vec![0.0, 0.0]],
            sensors_true: None,
            range_measurements: vec![rm(0, 1), rm(1, 2)],
            anchor_measurements: vec![AnchorMeasurement { i: 1, j: 0, y: 1.0, var: 1.0 }],
        };
        (t, scn)
    }

    #[test]
    fn first_eligible_clique_wins() {
        let (t, scn) = chain();
        let a = assign_measurements(&t, &scn).unwrap();
        assert_eq!(a.owner_of_pair(0, 1), Some(0));
        assert_eq!(a.owner_of_pair(2, 1), Some(1));
        assert_eq!(a.owner_of_anchor_set(1), Some(0));
        assert!(a.phi_bar[1].is_empty());
    }

    #[test]
    fn uncovered_edge_is_internal_error() {
        let (_, mut scn) = chain();
        scn.range_measurements.push(RangeMeasurement { i: 0, j: 2, r: 1.0, var: 1.0 });
        let t = CliqueTree::from_parts(vec![Clique::from([0, 1]), Clique::from([1, 2])], vec![None, Some(0)]).unwrap();
        assert!(matches!(assign_measurements(&t, &scn), Err(Error::Assignment(_))));
    }
}
