use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::model::{AnchorMeasurement, NetworkScenario, RangeMeasurement};
use crate::error::{Error, Result};
use crate::graphcore::build_measurement_graph;

pub const MAX_SEED_RETRIES: usize = 1000;

/// Stream used for measurement noise, so positions and noise drawn from the
/// same seed stay independent.
const NOISE_STREAM: u64 = 1;

/// Anchors at the centres of a k^d grid of cells covering the box
/// (k smallest with k^d ≥ m), first `m` cells in row-major order with the
/// first coordinate varying fastest.
pub fn anchor_grid(m: usize, extent: &[f64]) -> Vec<Vec<f64>> {
    let d = extent.len();
    let mut k = 1usize;
    while k.pow(d as u32) < m {
        k += 1;
    }
    (0..m)
        .map(|idx| {
            let mut rest = idx;
            extent
                .iter()
                .map(|&w| {
                    let c = rest % k;
                    rest /= k;
                    (c as f64 + 0.5) / k as f64 * w
                })
                .collect()
        })
        .collect()
}

/// Sensors uniform in `[0, extent)`; anchors on [`anchor_grid`].
///
/// Seeds `seed, seed + 1, …` are tried until the inter-sensor graph is
/// connected and at least one anchor is in range; the accepted seed is
/// stored in the scenario.
pub fn generate_scenario(n: usize, m: usize, extent: &[f64], rc: f64, seed: u64) -> Result<NetworkScenario> {
    let d = extent.len();
    if n == 0 || m == 0 {
        return Err(Error::InvalidScenario("need at least one sensor and one anchor".into()));
    }
    if d != 2 && d != 3 {
        return Err(Error::InvalidScenario(format!("area must be 2- or 3-dimensional, got {d}")));
    }
    if extent.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidScenario("area extents must be positive".into()));
    }
    if !(rc.is_finite() && rc > 0.0) {
        return Err(Error::InvalidScenario("communication range must be positive".into()));
    }
    let anchors = anchor_grid(m, extent);
    for attempt in 0..MAX_SEED_RETRIES as u64 {
        let s = seed.wrapping_add(attempt);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let sensors: Vec<Vec<f64>> =
            (0..n).map(|_| extent.iter().map(|&w| rng.random::<f64>() * w).collect()).collect();
        let (g, anchor_adj) = build_measurement_graph(&sensors, &anchors, rc)?;
        if g.is_connected() && anchor_adj.iter().any(|a| !a.is_empty()) {
            return Ok(NetworkScenario {
                dim: d,
                rc,
                seed: s,
                anchors,
                sensors_true: Some(sensors),
                range_measurements: Vec::new(),
                anchor_measurements: Vec::new(),
            });
        }
    }
    Err(Error::ScenarioGeneration(MAX_SEED_RETRIES))
}

/// Placements for Monte-Carlo runs `0..runs`. Run `r` starts its seed
/// search at `seed + r`, or just past the seed the previous run used if
/// that run had to retry, so no two runs share a placement.
pub fn generate_runs(n: usize, m: usize, extent: &[f64], rc: f64, seed: u64, runs: usize) -> Result<Vec<NetworkScenario>> {
    let mut out: Vec<NetworkScenario> = Vec::with_capacity(runs);
    for r in 0..runs as u64 {
        let start = match out.last() {
            Some(prev) => seed.wrapping_add(r).max(prev.seed.wrapping_add(1)),
            None => seed,
        };
        out.push(generate_scenario(n, m, extent, rc, start)?);
    }
    Ok(out)
}

/// Fill in ranges for every pair within `rc`: `|true distance + σ·ξ|`,
/// ξ standard normal from ChaCha8 (`seed`, stream 1), drawn first for the
/// inter-sensor pairs in lexicographic order and then for (sensor, anchor)
/// pairs in lexicographic order.
///
/// Stored variance is σ²; a noiseless channel is stored with variance 1 so
/// the cost weights stay finite.
pub fn synthesize_measurements(scn: &NetworkScenario, sigma_r: f64, sigma_a: f64, seed: u64) -> Result<NetworkScenario> {
    let sensors = scn
        .sensors_true
        .as_ref()
        .ok_or_else(|| Error::InvalidScenario("true sensor positions required".into()))?;
    if !(sigma_r >= 0.0 && sigma_a >= 0.0) {
        return Err(Error::InvalidScenario("noise levels must be non-negative".into()));
    }
    let (g, anchor_adj) = build_measurement_graph(sensors, &scn.anchors, scn.rc)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(NOISE_STREAM);
    let var = |s: f64| if s > 0.0 { s * s } else { 1.0 };
    let mut out = scn.clone();
    out.range_measurements = g
        .edges()
        .map(|(i, j)| {
            let xi: f64 = rng.sample(StandardNormal);
            let dist = crate::graphcore::distance(&sensors[i], &sensors[j]);
            RangeMeasurement { i, j, r: (dist + sigma_r * xi).abs(), var: var(sigma_r) }
        })
        .collect();
    out.anchor_measurements = anchor_adj
        .iter()
        .enumerate()
        .flat_map(|(i, list)| list.iter().map(move |&a| (i, a)))
        .map(|(i, a)| {
            let xi: f64 = rng.sample(StandardNormal);
            let dist = crate::graphcore::distance(&sensors[i], &scn.anchors[a]);
            AnchorMeasurement { i, j: a, y: (dist + sigma_a * xi).abs(), var: var(sigma_a) }
        })
        .collect();
    Ok(out)
}
