use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphcore::CliqueTree;
use crate::scenario::NetworkScenario;

/// Meaning of one coordinate of the global vector `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Var {
    /// Coordinate `c` of sensor `i`.
    Position(usize, usize),
    /// Entry `(i, j)`, `i <= j`, of the Gram matrix `S`.
    Gram(usize, usize),
    /// Squared-distance variable of range measurement `m`.
    Lambda(usize),
    /// Distance variable of range measurement `m`.
    Dist(usize),
    /// Squared-distance variable of anchor measurement `m`.
    Xi(usize),
    /// Distance variable of anchor measurement `m`.
    AnchorDist(usize),
}

/// Layout of `y`: sensor positions, then the sparse Gram pattern, then a
/// `(Λ, D)` pair per range measurement and a `(Ξ, Z)` pair per anchor
/// measurement. Measurements are numbered in lexicographic `(i, j)` order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlobalVariableIndex {
    dim: usize,
    n_sensors: usize,
    gram: Vec<(usize, usize)>,
    #[serde(skip)]
    gram_pos: BTreeMap<(usize, usize), usize>,
    ranges: Vec<(usize, usize)>,
    anchor_pairs: Vec<(usize, usize)>,
    supports: Vec<Vec<usize>>,
}

impl GlobalVariableIndex {
    /// Index for the cliques of `tree`; supports are filled in later.
    pub(crate) fn new(tree: &CliqueTree, scn: &NetworkScenario) -> Self {
        let mut gram_set = std::collections::BTreeSet::new();
        for i in 0..scn.n_sensors() {
            gram_set.insert((i, i));
        }
        for c in tree.cliques() {
            let m = c.members();
            for (a, &i) in m.iter().enumerate() {
                for &j in &m[a..] {
                    gram_set.insert((i, j));
                }
            }
        }
        let gram: Vec<_> = gram_set.into_iter().collect();
        let gram_pos = gram.iter().enumerate().map(|(p, &e)| (e, p)).collect();
        let mut ranges: Vec<_> = scn.range_measurements.iter().map(|m| (m.i, m.j)).collect();
        ranges.sort_unstable();
        let mut anchor_pairs: Vec<_> = scn.anchor_measurements.iter().map(|m| (m.i, m.j)).collect();
        anchor_pairs.sort_unstable();
        GlobalVariableIndex {
            dim: scn.dim,
            n_sensors: scn.n_sensors(),
            gram,
            gram_pos,
            ranges,
            anchor_pairs,
            supports: vec![Vec::new(); tree.len()],
        }
    }

    /// `n` coordinates with no localization meaning (each reads as a
    /// one-dimensional position), one support per agent.
    pub fn untyped(n: usize, supports: Vec<Vec<usize>>) -> Self {
        GlobalVariableIndex {
            dim: 1,
            n_sensors: n,
            gram: Vec::new(),
            gram_pos: BTreeMap::new(),
            ranges: Vec::new(),
            anchor_pairs: Vec::new(),
            supports,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    pub fn n_y(&self) -> usize {
        self.gram_base() + self.gram.len() + 2 * self.ranges.len() + 2 * self.anchor_pairs.len()
    }

    fn gram_base(&self) -> usize {
        self.n_sensors * self.dim
    }

    fn range_base(&self) -> usize {
        self.gram_base() + self.gram.len()
    }

    fn anchor_base(&self) -> usize {
        self.range_base() + 2 * self.ranges.len()
    }

    pub fn position(&self, i: usize, c: usize) -> usize {
        i * self.dim + c
    }

    /// Slot of `S_ij`, if the pair is in the pattern.
    pub fn gram(&self, i: usize, j: usize) -> Option<usize> {
        self.gram_pos.get(&(i.min(j), i.max(j))).map(|p| self.gram_base() + p)
    }

    pub fn gram_pattern(&self) -> &[(usize, usize)] {
        &self.gram
    }

    /// Range measurements `(i, j)` in numbering order.
    pub fn ranges(&self) -> &[(usize, usize)] {
        &self.ranges
    }

    /// Anchor measurements `(sensor, anchor)` in numbering order.
    pub fn anchor_pairs(&self) -> &[(usize, usize)] {
        &self.anchor_pairs
    }

    pub fn range_number(&self, i: usize, j: usize) -> Option<usize> {
        self.ranges.binary_search(&(i.min(j), i.max(j))).ok()
    }

    pub fn anchor_number(&self, sensor: usize, anchor: usize) -> Option<usize> {
        self.anchor_pairs.binary_search(&(sensor, anchor)).ok()
    }

    pub fn lambda(&self, m: usize) -> usize {
        self.range_base() + 2 * m
    }

    pub fn dist(&self, m: usize) -> usize {
        self.range_base() + 2 * m + 1
    }

    pub fn xi(&self, m: usize) -> usize {
        self.anchor_base() + 2 * m
    }

    pub fn anchor_dist(&self, m: usize) -> usize {
        self.anchor_base() + 2 * m + 1
    }

    pub fn describe(&self, idx: usize) -> Option<Var> {
        if idx < self.gram_base() {
            Some(Var::Position(idx / self.dim, idx % self.dim))
        } else if idx < self.range_base() {
            let (i, j) = self.gram[idx - self.gram_base()];
            Some(Var::Gram(i, j))
        } else if idx < self.anchor_base() {
            let off = idx - self.range_base();
            Some(if off.is_multiple_of(2) { Var::Lambda(off / 2) } else { Var::Dist(off / 2) })
        } else if idx < self.n_y() {
            let off = idx - self.anchor_base();
            Some(if off.is_multiple_of(2) { Var::Xi(off / 2) } else { Var::AnchorDist(off / 2) })
        } else {
            None
        }
    }

    /// Sorted global coordinates `J_k` touched by agent `k`.
    pub fn support(&self, k: usize) -> &[usize] {
        &self.supports[k]
    }

    pub fn supports(&self) -> &[Vec<usize>] {
        &self.supports
    }

    pub(crate) fn set_support(&mut self, k: usize, mut support: Vec<usize>) {
        support.sort_unstable();
        support.dedup();
        self.supports[k] = support;
    }

    /// Coordinates describing the separator `U_k` of a tree node: positions of
    /// the shared sensors and the Gram entries among them.
    pub fn separator_coordinates(&self, sensors: &[usize]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (a, &i) in sensors.iter().enumerate() {
            out.extend((0..self.dim).map(|c| self.position(i, c)));
            for &j in &sensors[a..] {
                out.push(self.gram(i, j).ok_or_else(|| {
                    Error::IndexInconsistency(format!("S({}, {}) missing from pattern", i + 1, j + 1))
                })?);
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}
