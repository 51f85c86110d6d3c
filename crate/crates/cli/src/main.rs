//! `treeloc`: generate localization scenarios, solve them with the
//! centralized or distributed interior-point solver, and aggregate results.
//!
//! Output layout of `solve --out DIR`:
//!
//! - `results.csv`: `run_id,solver,status,iters,per_agent_comms,tree_height,rmse,objective,wall_time_s`,
//!   `rmse` empty without true positions, `per_agent_comms` empty for the centralized solver
//! - `estimates/<run_id>.json`: estimated positions and run summary
//! - `traces/<run_id>.csv` (`--trace`): `iter,mu,delta,r_primal,r_primal_lin,r_dual,r_dual_lin,t_p,t_d`
//! - `comm/<run_id>.csv` (`--trace`, distributed): `iter,pass,agent,msgs_sent,scalars_sent`,
//!   agents 1-based, closed by a `total,all,all,...` row
//! - `subproblems/<run_id>.json` (`--dump`): per-agent block sizes and measurements
//!
//! Generated runs are named `sigma-<σ>/run-<r>`; run `r` uses placement seed
//! `seed + r` (moved past any seed an earlier run consumed by retrying) and
//! draws its noise from the placement seed. Graphs inside the library
//! serialize as `{"n_vertices": n, "edges": [[i, j], ...]}`.
//!
//! Exit status: 0 success, 1 some run did not converge, 2 bad input.

mod config;
mod report;
mod solve;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};
use treeloc::pdipm::SolverOptions;
use treeloc::relaxation::{Regularization, RootChoice};
use treeloc::scenario::save_scenario;

use config::{generated_runs, input_runs, parse_area, parse_root, ExperimentConfig, GenerateParams, SolverKind, Source};

#[derive(Parser)]
#[command(name = "treeloc", version, about = "Distributed sensor network localization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write scenario files, one per noise level and run.
    Generate(GenerateArgs),
    /// Solve scenario files or a generated sweep.
    Solve(SolveArgs),
    /// Aggregate results files per noise level and solver.
    Report(ReportArgs),
}

#[derive(Clone, Debug)]
struct Area(Vec<f64>);

#[derive(Args)]
struct PlacementArgs {
    /// Number of sensors.
    #[arg(long)]
    sensors: Option<usize>,
    #[arg(long, default_value_t = 9)]
    anchors: usize,
    /// Deployment area, `WxH`.
    #[arg(long, default_value = "1x1", value_parser = |s: &str| parse_area(s).map(Area))]
    area: Area,
    /// Communication range.
    #[arg(long, default_value_t = 0.2)]
    rc: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Measurement noise standard deviation; repeat for a sweep.
    #[arg(long = "noise", default_values_t = [0.01])]
    noise: Vec<f64>,
    /// Monte-Carlo runs per noise level.
    #[arg(long, default_value_t = 1)]
    runs: usize,
}

impl PlacementArgs {
    fn params(&self) -> Option<GenerateParams> {
        Some(GenerateParams {
            sensors: self.sensors?,
            anchors: self.anchors,
            area: self.area.0.clone(),
            rc: self.rc,
            seed: self.seed,
        })
    }
}

#[derive(Args)]
#[command(group(ArgGroup::new("placement").required(true).args(["sensors"])))]
struct GenerateArgs {
    #[command(flatten)]
    placement: PlacementArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["sensors", "input"])))]
struct SolveArgs {
    #[command(flatten)]
    placement: PlacementArgs,
    /// Scenario files or directories (searched recursively for `*.json`).
    #[arg(long, num_args = 1.., conflicts_with_all = ["sensors", "anchors", "area", "rc", "seed", "noise", "runs"])]
    input: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = SolverKind::Distributed)]
    solver: SolverKind,
    /// Clique-tree root: `auto` (largest clique) or a 1-based clique index.
    #[arg(long, default_value = "auto", value_parser = parse_root)]
    root: RootChoice,
    #[arg(long)]
    eps_feas: Option<f64>,
    #[arg(long)]
    eps_gap: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Fraction-to-boundary factor.
    #[arg(long)]
    gamma: Option<f64>,
    /// Centering factor.
    #[arg(long)]
    sigma_c: Option<f64>,
    /// Trace weight on each Gram block.
    #[arg(long, default_value_t = 0.0)]
    reg_alpha: f64,
    /// Trace weight on each range block.
    #[arg(long, default_value_t = 0.0)]
    reg_rho: f64,
    /// Trace weight on each anchor block.
    #[arg(long, default_value_t = 0.0)]
    reg_mu: f64,
    #[arg(long)]
    out: PathBuf,
    /// Write per-iteration traces and communication logs.
    #[arg(long)]
    trace: bool,
    /// Write per-agent subproblem summaries.
    #[arg(long)]
    dump: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// `results.csv` files or directories containing one.
    #[arg(required = true)]
    results: Vec<PathBuf>,
    /// Output file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SolveArgs {
    fn config(&self) -> ExperimentConfig {
        let d = SolverOptions::default();
        let source = match self.placement.params() {
            Some(p) => Source::Generate(p),
            None => Source::Input(self.input.clone()),
        };
        ExperimentConfig {
            source,
            noise: self.placement.noise.clone(),
            runs: self.placement.runs,
            solver: self.solver,
            root: self.root,
            options: SolverOptions {
                eps_feas: self.eps_feas.unwrap_or(d.eps_feas),
                eps_gap: self.eps_gap.unwrap_or(d.eps_gap),
                max_iters: self.max_iters.unwrap_or(d.max_iters),
                gamma: self.gamma.unwrap_or(d.gamma),
                sigma_c: self.sigma_c.unwrap_or(d.sigma_c),
                center_first: d.center_first,
            },
            regularization: Regularization { alpha: self.reg_alpha, rho: self.reg_rho, mu: self.reg_mu },
            out: self.out.clone(),
            trace: self.trace,
            dump: self.dump,
        }
    }
}

/// Write `DIR/sigma-<σ>/run-<r>.json` for every noise level and run.
fn cmd_generate(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let Source::Generate(params) = &cfg.source else { bail!("generate needs placement parameters") };
    let mut written = Vec::new();
    for run in generated_runs(params, &cfg.noise, cfg.runs)? {
        let path = cfg.out.join(format!("{}.json", run.id));
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        save_scenario(&run.scenario, &path).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate(args) => {
            let cfg = ExperimentConfig {
                source: Source::Generate(args.placement.params().context("--sensors is required")?),
                noise: args.placement.noise.clone(),
                runs: args.placement.runs,
                solver: SolverKind::Distributed,
                root: RootChoice::Auto,
                options: SolverOptions::default(),
                regularization: Regularization::default(),
                out: args.out,
                trace: false,
                dump: false,
            };
            cfg.validate()?;
            let written = cmd_generate(&cfg)?;
            println!("wrote {} scenario files under {}", written.len(), cfg.out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve(args) => {
            let cfg = args.config();
            cfg.validate()?;
            let runs = match &cfg.source {
                Source::Generate(p) => generated_runs(p, &cfg.noise, cfg.runs)?,
                Source::Input(paths) => input_runs(paths)?,
            };
            let all_converged = solve::cmd_solve(&cfg, &runs)?;
            Ok(if all_converged { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Report(args) => {
            report::cmd_report(&args.results, args.out.as_deref().map(Path::new))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
