use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use crate::solve::{ResultRow, RESULTS_HEADER};

/// One line of the aggregate table. Statistics skip runs where the value is
/// missing; the rmse and comms columns are empty when no run has one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateRow {
    pub noise: Option<f64>,
    pub solver: String,
    pub runs: usize,
    pub converged: usize,
    pub rmse_mean: Option<f64>,
    pub rmse_min: Option<f64>,
    pub rmse_max: Option<f64>,
    /// Root mean square of the per-run values.
    pub rmse_rms: Option<f64>,
    pub iters_mean: f64,
    pub iters_min: usize,
    pub iters_max: usize,
    pub comms_mean: Option<f64>,
    pub comms_min: Option<usize>,
    pub comms_max: Option<usize>,
}

/// Noise level encoded in a `sigma-<σ>/...` run id.
pub fn noise_of(run_id: &str) -> Option<f64> {
    run_id.split('/').next()?.strip_prefix("sigma-")?.parse().ok()
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let file = if path.is_dir() { path.join("results.csv") } else { path.to_path_buf() };
    let mut r = csv::Reader::from_path(&file).with_context(|| format!("opening {}", file.display()))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != RESULTS_HEADER {
        bail!("{}: unexpected header `{}`", file.display(), header.join(","));
    }
    r.deserialize()
        .map(|row| row.with_context(|| format!("reading {}", file.display())))
        .collect()
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn fmin(v: &[f64]) -> Option<f64> {
    v.iter().copied().reduce(f64::min)
}

fn fmax(v: &[f64]) -> Option<f64> {
    v.iter().copied().reduce(f64::max)
}

pub fn aggregate(rows: &[ResultRow]) -> Vec<AggregateRow> {
    // keyed on the noise bits so groups sort numerically (σ ≥ 0), runs without a level last
    let mut groups: BTreeMap<(u64, String), Vec<&ResultRow>> = BTreeMap::new();
    for row in rows {
        let key = noise_of(&row.run_id).map_or(u64::MAX, f64::to_bits);
        groups.entry((key, row.solver.clone())).or_default().push(row);
    }
    groups
        .into_iter()
        .map(|((key, solver), rows)| {
            let rmse: Vec<f64> = rows.iter().filter_map(|r| r.rmse).collect();
            let iters: Vec<f64> = rows.iter().map(|r| r.iters as f64).collect();
            let comms: Vec<usize> = rows.iter().filter_map(|r| r.per_agent_comms).collect();
            let comms_f: Vec<f64> = comms.iter().map(|&c| c as f64).collect();
            AggregateRow {
                noise: (key != u64::MAX).then(|| f64::from_bits(key)),
                solver,
                runs: rows.len(),
                converged: rows.iter().filter(|r| r.converged()).count(),
                rmse_mean: mean(&rmse),
                rmse_min: fmin(&rmse),
                rmse_max: fmax(&rmse),
                rmse_rms: mean(&rmse.iter().map(|e| e * e).collect::<Vec<_>>()).map(f64::sqrt),
                iters_mean: mean(&iters).unwrap_or(0.0),
                iters_min: rows.iter().map(|r| r.iters).min().unwrap_or(0),
                iters_max: rows.iter().map(|r| r.iters).max().unwrap_or(0),
                comms_mean: mean(&comms_f),
                comms_min: comms.iter().copied().min(),
                comms_max: comms.iter().copied().max(),
            }
        })
        .collect()
}

/// Aggregate results files (or directories holding `results.csv`) into
/// `out`, or stdout when no output path is given.
pub fn cmd_report(inputs: &[PathBuf], out: Option<&Path>) -> Result<()> {
    if inputs.is_empty() {
        bail!("no results files given");
    }
    let mut rows = Vec::new();
    for p in inputs {
        rows.extend(read_results(p)?);
    }
    let table = aggregate(&rows);
    let sink: Box<dyn Write> = match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?)
        }
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for row in &table {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
