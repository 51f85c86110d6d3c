use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphcore::Graph;

/// Inter-sensor range `r` between sensors `i < j` (0-based in files).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeMeasurement {
    pub i: usize,
    pub j: usize,
    pub r: f64,
    pub var: f64,
}

/// Range `y` from sensor `i` to anchor `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorMeasurement {
    pub i: usize,
    pub j: usize,
    pub y: f64,
    pub var: f64,
}

/// Positions and noisy ranges of one localization instance.
///
/// Sensor and anchor ids are 0-based. `sensors_true` is absent for
/// ingested field data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkScenario {
    pub dim: usize,
    pub rc: f64,
    pub seed: u64,
    pub anchors: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensors_true: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub range_measurements: Vec<RangeMeasurement>,
    #[serde(default)]
    pub anchor_measurements: Vec<AnchorMeasurement>,
}

impl NetworkScenario {
    pub fn n_sensors(&self) -> usize {
        match &self.sensors_true {
            Some(s) => s.len(),
            None => {
                let r = self.range_measurements.iter().map(|m| m.j + 1);
                let a = self.anchor_measurements.iter().map(|m| m.i + 1);
                r.chain(a).max().unwrap_or(0)
            }
        }
    }

    pub fn n_anchors(&self) -> usize {
        self.anchors.len()
    }

    /// Graph over sensors with one edge per inter-sensor measurement.
    pub fn range_graph(&self) -> Graph {
        Graph::from_edges(self.n_sensors(), self.range_measurements.iter().map(|m| (m.i, m.j)))
    }

    /// Anchor measurement positions grouped by sensor, anchors ascending.
    pub fn anchor_measurements_of(&self, sensor: usize) -> Vec<&AnchorMeasurement> {
        let mut out: Vec<_> = self.anchor_measurements.iter().filter(|m| m.i == sensor).collect();
        out.sort_by_key(|m| m.j);
        out
    }

    /// Full structural check; used on load and by the solver entry points.
    pub fn validate(&self) -> Result<()> {
        let schema = |path: String, message: String| Err(Error::Schema { path, message });
        if self.dim != 2 && self.dim != 3 {
            return schema("dim".into(), format!("must be 2 or 3, got {}", self.dim));
        }
        if !(self.rc.is_finite() && self.rc >= 0.0) {
            return schema("rc".into(), "must be finite and non-negative".into());
        }
        for (k, a) in self.anchors.iter().enumerate() {
            check_point(a, self.dim, &format!("anchors[{k}]"))?;
        }
        if let Some(s) = &self.sensors_true {
            for (k, p) in s.iter().enumerate() {
                check_point(p, self.dim, &format!("sensors_true[{k}]"))?;
            }
        }
        let n = self.n_sensors();
        if n == 0 {
            return Err(Error::InvalidScenario("no sensors".into()));
        }
        let mut seen = BTreeSet::new();
        for (k, m) in self.range_measurements.iter().enumerate() {
            let at = |f: &str| format!("range_measurements[{k}].{f}");
            if m.i >= m.j {
                return schema(at("j"), format!("pair ({}, {}) must satisfy i < j", m.i, m.j));
            }
            if m.j >= n {
                return schema(at("j"), format!("sensor {} out of range ({n} sensors)", m.j));
            }
            if !seen.insert((m.i, m.j)) {
                return schema(at("i"), format!("duplicate measurement ({}, {})", m.i, m.j));
            }
            check_value(m.r, &at("r"))?;
            check_variance(m.var, &at("var"))?;
        }
        let mut seen = BTreeSet::new();
        for (k, m) in self.anchor_measurements.iter().enumerate() {
            let at = |f: &str| format!("anchor_measurements[{k}].{f}");
            if m.i >= n {
                return schema(at("i"), format!("sensor {} out of range ({n} sensors)", m.i));
            }
            if m.j >= self.anchors.len() {
                return schema(at("j"), format!("anchor {} out of range", m.j));
            }
            if !seen.insert((m.i, m.j)) {
                return schema(at("i"), format!("duplicate measurement ({}, {})", m.i, m.j));
            }
            check_value(m.y, &at("y"))?;
            check_variance(m.var, &at("var"))?;
        }
        let comps = self.range_graph().components();
        if comps.len() > 1 {
            let listed: Vec<String> = comps
                .iter()
                .map(|c| format!("{{{}}}", c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")))
                .collect();
            return Err(Error::DisconnectedMeasurements(listed.join(" ")));
        }
        Ok(())
    }
}

fn check_point(p: &[f64], dim: usize, path: &str) -> Result<()> {
    if p.len() != dim {
        return Err(Error::Schema { path: path.into(), message: format!("expected {dim} coordinates, got {}", p.len()) });
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::Schema { path: path.into(), message: "non-finite coordinate".into() });
    }
    Ok(())
}

fn check_value(v: f64, path: &str) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Schema { path: path.into(), message: format!("range {v} must be finite and non-negative") })
    }
}

fn check_variance(v: f64, path: &str) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Schema { path: path.into(), message: format!("variance {v} must be positive") })
    }
}

/// Parse and validate scenario JSON text.
pub fn parse_scenario(text: &str) -> Result<NetworkScenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scn: NetworkScenario = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    scn.validate()?;
    Ok(scn)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<NetworkScenario> {
    parse_scenario(&fs::read_to_string(path)?)
}

pub fn save_scenario(scn: &NetworkScenario, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(scn)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Outcome of one localization run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimated_positions: Vec<Vec<f64>>,
    /// Absent when the scenario carries no true positions.
    pub rmse: Option<f64>,
    pub iterations: usize,
    /// Only the distributed solver reports this.
    pub per_agent_communications: Option<usize>,
    pub wall_time_s: f64,
}
