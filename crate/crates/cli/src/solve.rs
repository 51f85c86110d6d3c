use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use treeloc::msgpass::{build_agent_tree, solve_distributed, CommLog, Pass};
use treeloc::pdipm::{solve_centralized, TraceRow};
use treeloc::relaxation::{extract_positions, summarize, LocalizationProblem};
use treeloc::scenario::{rmse, EstimateReport};
use treeloc::Solution64;

use crate::config::{ExperimentConfig, Run, SolverKind};

pub const RESULTS_HEADER: [&str; 9] =
    ["run_id", "solver", "status", "iters", "per_agent_comms", "tree_height", "rmse", "objective", "wall_time_s"];

/// One line of `results.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub run_id: String,
    pub solver: String,
    pub status: String,
    pub iters: usize,
    pub per_agent_comms: Option<usize>,
    pub tree_height: usize,
    pub rmse: Option<f64>,
    pub objective: Option<f64>,
    pub wall_time_s: f64,
}

impl ResultRow {
    pub fn converged(&self) -> bool {
        self.status == "converged"
    }
}

fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn per_run(out: &Path, dir: &str, id: &str, ext: &str) -> PathBuf {
    out.join(dir).join(format!("{id}.{ext}"))
}

fn write_trace(path: &Path, trace: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["iter", "mu", "delta", "r_primal", "r_primal_lin", "r_dual", "r_dual_lin", "t_p", "t_d"])?;
    for t in trace {
        w.serialize((t.iter, t.mu, t.delta, t.r_primal, t.r_primal_lin, t.r_dual, t.r_dual_lin, t.t_p, t.t_d))?;
    }
    w.flush()?;
    Ok(())
}

/// Per-pass rows with 1-based agents, then one `total` row over the
/// iterations (the setup exchange at iteration 0 is listed but not totalled).
fn write_comm(path: &Path, log: &CommLog) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["iter", "pass", "agent", "msgs_sent", "scalars_sent"])?;
    let (mut msgs, mut scalars) = (0, 0);
    for r in log.records() {
        w.serialize((r.iter, r.pass.label(), r.agent + 1, r.msgs_sent, r.scalars_sent()))?;
        if r.pass != Pass::Setup {
            msgs += r.msgs_sent;
            scalars += r.scalars_sent();
        }
    }
    w.serialize(("total", "all", "all", msgs, scalars))?;
    w.flush()?;
    Ok(())
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

/// Solve one scenario. Problem construction errors are input errors and
/// abort the sweep; solver errors become a failed row.
fn solve_run(cfg: &ExperimentConfig, run: &Run) -> Result<ResultRow> {
    let problem = LocalizationProblem::<f64>::new(&run.scenario, cfg.root)
        .and_then(|p| p.with_regularization(&cfg.regularization))
        .with_context(|| format!("run {}", run.id))?;
    let mut row = ResultRow {
        run_id: run.id.clone(),
        solver: cfg.solver.label().to_string(),
        status: String::new(),
        iters: 0,
        per_agent_comms: None,
        tree_height: problem.tree.height(),
        rmse: None,
        objective: None,
        wall_time_s: 0.0,
    };
    if cfg.dump {
        write_json(&per_run(&cfg.out, "subproblems", &run.id, "json"), &summarize(&problem.sdp))?;
    }

    let start = Instant::now();
    let solved: treeloc::Result<(Solution64, Option<CommLog>)> = match cfg.solver {
        SolverKind::Centralized => solve_centralized(&problem.sdp, &cfg.options).map(|s| (s, None)),
        SolverKind::Distributed => build_agent_tree(&problem.tree, &problem.sdp)
            .and_then(|tree| solve_distributed(&problem.sdp, &tree, &cfg.options))
            .map(|d| (d.solution, Some(d.comm))),
    };
    row.wall_time_s = start.elapsed().as_secs_f64();
    let (sol, comm) = match solved {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}: solver failed: {e}", run.id);
            row.status = "failed".into();
            return Ok(row);
        }
    };
    if let treeloc::pdipm::Status::KktSingular(d) = &sol.status {
        eprintln!("{}: {d}", run.id);
    }

    let positions = extract_positions(&problem.sdp.index, sol.y())?;
    row.status = sol.status.label().to_string();
    row.iters = sol.iterations;
    row.objective = Some(sol.objective);
    row.per_agent_comms = comm.as_ref().map(|c| c.per_agent_communications().into_iter().max().unwrap_or(0));
    row.rmse = match &run.scenario.sensors_true {
        Some(truth) => Some(rmse(truth, std::slice::from_ref(&positions))?),
        None => None,
    };

    let report = EstimateReport {
        estimated_positions: positions,
        rmse: row.rmse,
        iterations: row.iters,
        per_agent_communications: row.per_agent_comms,
        wall_time_s: row.wall_time_s,
    };
    write_json(&per_run(&cfg.out, "estimates", &run.id, "json"), &report)?;
    if cfg.trace {
        write_trace(&per_run(&cfg.out, "traces", &run.id, "csv"), &sol.trace)?;
        if let Some(log) = &comm {
            write_comm(&per_run(&cfg.out, "comm", &run.id, "csv"), log)?;
        }
    }
    Ok(row)
}

/// Solve every run and write `results.csv`; `Ok(true)` iff all converged.
pub fn cmd_solve(cfg: &ExperimentConfig, runs: &[Run]) -> Result<bool> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut rows = Vec::with_capacity(runs.len());
    for run in runs {
        let row = solve_run(cfg, run)?;
        println!(
            "{} {} {} iters={} rmse={}",
            row.run_id,
            row.solver,
            row.status,
            row.iters,
            row.rmse.map_or("-".to_string(), |e| format!("{e:.6}"))
        );
        rows.push(row);
    }
    let mut w = csv::Writer::from_writer(create(&cfg.out.join("results.csv"))?);
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(rows.iter().all(ResultRow::converged))
}
