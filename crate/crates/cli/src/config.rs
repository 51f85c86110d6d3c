use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use treeloc::pdipm::SolverOptions;
use treeloc::relaxation::{Regularization, RootChoice};
use treeloc::scenario::{generate_runs, load_scenario, synthesize_measurements, NetworkScenario};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SolverKind {
    Centralized,
    Distributed,
}

impl SolverKind {
    pub fn label(self) -> &'static str {
        match self {
            SolverKind::Centralized => "centralized",
            SolverKind::Distributed => "distributed",
        }
    }
}

/// Random placement parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerateParams {
    pub sensors: usize,
    pub anchors: usize,
    pub area: Vec<f64>,
    pub rc: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Generate(GenerateParams),
    /// Scenario files, or directories searched recursively for `*.json`.
    Input(Vec<PathBuf>),
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub source: Source,
    pub noise: Vec<f64>,
    pub runs: usize,
    pub solver: SolverKind,
    pub root: RootChoice,
    pub options: SolverOptions,
    pub regularization: Regularization,
    pub out: PathBuf,
    pub trace: bool,
    pub dump: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            bail!("--runs must be at least 1");
        }
        if self.noise.is_empty() {
            bail!("at least one --noise level is required");
        }
        if let Some(s) = self.noise.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            bail!("noise level {s} must be a non-negative number");
        }
        if let Source::Input(paths) = &self.source {
            if paths.is_empty() {
                bail!("no input paths given");
            }
        }
        self.options.validate()?;
        Ok(())
    }
}

/// Parse `WxH` (or `WxHxD`).
pub fn parse_area(text: &str) -> Result<Vec<f64>, String> {
    let parts: Result<Vec<f64>, _> = text.split(['x', 'X']).map(|p| p.trim().parse::<f64>()).collect();
    match parts {
        Ok(v) if (v.len() == 2 || v.len() == 3) && v.iter().all(|w| w.is_finite() && *w > 0.0) => Ok(v),
        _ => Err(format!("expected WxH with positive sides, got `{text}`")),
    }
}

pub fn parse_root(text: &str) -> Result<RootChoice, String> {
    if text == "auto" {
        return Ok(RootChoice::Auto);
    }
    match text.parse::<usize>() {
        Ok(k) if k >= 1 => Ok(RootChoice::Clique(k - 1)),
        _ => Err(format!("expected `auto` or a 1-based clique index, got `{text}`")),
    }
}

/// Directory name of a noise level.
pub fn noise_dir(sigma: f64) -> String {
    format!("sigma-{sigma}")
}

pub struct Run {
    pub id: String,
    pub scenario: NetworkScenario,
}

/// Scenarios of a generated sweep: every noise level reuses the same
/// placements, run `r` drawing its noise from the placement's seed.
pub fn generated_runs(p: &GenerateParams, noise: &[f64], runs: usize) -> Result<Vec<Run>> {
    let placements = generate_runs(p.sensors, p.anchors, &p.area, p.rc, p.seed, runs)?;
    let mut out = Vec::new();
    for &sigma in noise {
        for (r, geo) in placements.iter().enumerate() {
            out.push(Run {
                id: format!("{}/run-{r:03}", noise_dir(sigma)),
                scenario: synthesize_measurements(geo, sigma, sigma, geo.seed)?,
            });
        }
    }
    Ok(out)
}

fn collect_json(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_json(&p, out)?;
        } else if p.extension().is_some_and(|e| e == "json") {
            out.push(p);
        }
    }
    Ok(())
}

fn run_id(path: &Path, base: Option<&Path>) -> String {
    let stem = path.with_extension("");
    if let Some(rel) = base.and_then(|b| stem.strip_prefix(b).ok()) {
        return rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
    }
    let name = stem.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    match stem.parent().and_then(|p| p.file_name()).map(|s| s.to_string_lossy()) {
        Some(parent) if parent.starts_with("sigma-") => format!("{parent}/{name}"),
        _ => name,
    }
}

/// Load every scenario named on the command line.
pub fn input_runs(paths: &[PathBuf]) -> Result<Vec<Run>> {
    let mut out = Vec::new();
    for path in paths {
        let files: Vec<(PathBuf, Option<&Path>)> = if path.is_dir() {
            let mut found = Vec::new();
            collect_json(path, &mut found)?;
            if found.is_empty() {
                bail!("no scenario files under {}", path.display());
            }
            found.into_iter().map(|f| (f, Some(path.as_path()))).collect()
        } else {
            vec![(path.clone(), None)]
        };
        for (file, base) in files {
            let scenario = load_scenario(&file).with_context(|| format!("loading {}", file.display()))?;
            out.push(Run { id: run_id(&file, base), scenario });
        }
    }
    let mut ids: Vec<&str> = out.iter().map(|r| r.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        bail!("two inputs map to run id `{}`", w[0]);
    }
    Ok(out)
}
