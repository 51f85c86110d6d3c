//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use treeloc::graphcore::{chordal_embed, enumerate_cliques, Clique, Graph};
use treeloc::msgpass::{build_agent_tree, solve_distributed, solve_distributed_observed, AgentTree, Pass};
use treeloc::pdipm::{
    compute_residuals, compute_scalings, solve_centralized, solve_kkt_centralized, Solution, SolverOptions,
};
use treeloc::relaxation::{
    extract_positions, formula_e_k, formula_n_k, formula_s_k, AgentSubproblem, BlockKind, BlockSpec, CoupledSdp,
    LocalizationProblem, RootChoice,
};
use treeloc::scenario::{generate_runs, generate_scenario, rmse, synthesize_measurements, NetworkScenario};
use treeloc::sdplinalg::{min_eigenvalue, nt_scaling, skron, smat, svec, svec_index, svec_len};
use treeloc::{DistributedSolution64, LocalizationProblem64};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn scenario(n: usize, m: usize, side: f64, rc: f64, sigma: f64, seed: u64) -> NetworkScenario {
    let s = generate_scenario(n, m, &[side, side], rc, seed).expect("scenario");
    synthesize_measurements(&s, sigma, sigma, s.seed).expect("measurements")
}

fn problem(scn: &NetworkScenario) -> LocalizationProblem64 {
    LocalizationProblem::new(scn, RootChoice::Auto).expect("problem")
}

fn tree_of(p: &LocalizationProblem64) -> AgentTree {
    build_agent_tree(&p.tree, &p.sdp).expect("agent tree")
}

fn ten_sensors() -> NetworkScenario {
    scenario(10, 9, 0.4, 0.2, 0.01, 1)
}

fn fifty_sensors(seed: u64) -> NetworkScenario {
    scenario(50, 9, 0.8, 0.2, 0.01, seed)
}

/// Random small networks with 4 to 15 sensors and 2 to 6 cliques.
fn small_fixtures() -> Vec<NetworkScenario> {
    let mut out = Vec::new();
    let mut seed = 0;
    while out.len() < 20 {
        let n = 4 + (seed as usize % 12);
        let scn = scenario(n, 4, 0.5, 0.25, 0.01, 100 + seed);
        seed += 1;
        let q = problem(&scn).tree.len();
        if (2..=6).contains(&q) {
            out.push(scn);
        }
    }
    out
}

fn c1_direction_equivalence() -> Outcome {
    let opts = SolverOptions::default();
    let (mut worst, mut iters) = (0.0f64, 0);
    let mut sizes = Vec::new();
    for scn in small_fixtures() {
        let p = problem(&scn);
        let tree = tree_of(&p);
        sizes.push((scn.n_sensors(), tree.len()));
        let d = solve_distributed_observed(&p.sdp, &tree, &opts, &mut |v| {
            let scal = compute_scalings(&p.sdp, v.state).expect("interior");
            let res = compute_residuals(&p.sdp, v.state, &scal);
            let c = solve_kkt_centralized(&p.sdp, v.state, &scal, &res).expect("centralized direction");
            worst = worst.max(v.direction.max_abs_diff(&c) / (1.0 + c.amax()));
            iters += 1;
        })
        .expect("distributed solve");
        if !d.solution.status.is_converged() {
            return outcome(false, format!("fixture {:?} did not converge", sizes.last()));
        }
    }
    let n_range = (sizes.iter().map(|s| s.0).min().unwrap(), sizes.iter().map(|s| s.0).max().unwrap());
    let q_range = (sizes.iter().map(|s| s.1).min().unwrap(), sizes.iter().map(|s| s.1).max().unwrap());
    outcome(
        worst <= 1e-8,
        format!("worst relative gap {worst:.2e} over {iters} iterations, N {n_range:?}, q {q_range:?}"),
    )
}

struct PairedRun {
    name: &'static str,
    b_norm: f64,
    central: Solution<f64>,
    distributed: DistributedSolution64,
}

fn paired_runs() -> Vec<PairedRun> {
    let opts = SolverOptions::default();
    [("10-sensor", ten_sensors()), ("50-sensor", fifty_sensors(7))]
        .into_iter()
        .map(|(name, scn)| {
            let p = problem(&scn);
            let tree = tree_of(&p);
            PairedRun {
                name,
                b_norm: p.sdp.rhs_norm(),
                central: solve_centralized(&p.sdp, &opts).expect("centralized"),
                distributed: solve_distributed(&p.sdp, &tree, &opts).expect("distributed"),
            }
        })
        .collect()
}

fn c2_full_solve(runs: &[PairedRun]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for r in runs {
        let (c, d) = (&r.central, &r.distributed.solution);
        let rel = (c.y() - d.y()).norm() / c.y().norm();
        pass &= c.status.is_converged() && d.status.is_converged() && rel <= 1e-6;
        parts.push(format!("{} rel {rel:.2e} ({} iters)", r.name, d.iterations));
    }
    outcome(pass, parts.join(", "))
}

fn c3_kkt_residuals(runs: &[PairedRun]) -> Outcome {
    let mut pass = true;
    let mut worst = (0.0f64, 0.0f64);
    for r in runs {
        for s in [&r.central, &r.distributed.solution] {
            let feas = s.norms.max() / (1.0 + r.b_norm);
            worst = (worst.0.max(feas), worst.1.max(s.mu));
            pass &= s.norms.max() <= 1e-6 * (1.0 + r.b_norm) && s.mu <= 1e-6;
        }
    }
    outcome(pass, format!("max residual/(1+|b|) {:.2e}, max mu {:.2e}", worst.0, worst.1))
}

fn c4_communication() -> Outcome {
    let opts = SolverOptions::default();
    let mut fixtures = small_fixtures();
    fixtures.push(ten_sensors());
    fixtures.push(fifty_sensors(7));
    let (mut runs, mut payloads) = (0, 0);
    for scn in &fixtures {
        let p = problem(scn);
        let tree = tree_of(&p);
        let d = solve_distributed(&p.sdp, &tree, &opts).expect("distributed");
        if !d.solution.status.is_converged() {
            continue;
        }
        runs += 1;
        let iters = d.solution.iterations;
        if d.comm.per_agent_communications().iter().any(|&c| c != 6 * iters) {
            return outcome(false, format!("communication count differs from 6p on {} sensors", scn.n_sensors()));
        }
        for it in 1..=iters {
            for node in tree.nodes().iter().filter(|n| n.parent.is_some()) {
                let s = formula_s_k(2, node.shared_sensors.len());
                let rec = d.comm.record(it, Pass::Direction, node.id).expect("logged");
                if rec.scalars_up != s * (s + 1) / 2 + s {
                    return outcome(false, format!("agent {} payload {} at iteration {it}", node.id, rec.scalars_up));
                }
                payloads += 1;
            }
        }
    }
    outcome(runs > 0, format!("{runs} converged runs, {payloads} direction messages checked"))
}

fn c5_iteration_count() -> Outcome {
    let opts = SolverOptions::default();
    let mut iters = Vec::new();
    for geo in generate_runs(50, 9, &[0.8, 0.8], 0.2, 1000, 25).expect("scenarios") {
        let scn = synthesize_measurements(&geo, 0.01, 0.01, geo.seed).expect("measurements");
        let p = problem(&scn);
        let d = solve_distributed(&p.sdp, &tree_of(&p), &opts).expect("distributed");
        iters.push(if d.solution.status.is_converged() { Some(d.solution.iterations) } else { None });
    }
    let ok = iters.iter().filter(|p| p.is_some_and(|p| p <= 30)).count();
    let seen: Vec<usize> = iters.iter().flatten().copied().collect();
    outcome(
        ok as f64 >= 0.95 * 25.0,
        format!(
            "{ok}/25 converged within 30 iterations (p from {} to {})",
            seen.iter().min().unwrap_or(&0),
            seen.iter().max().unwrap_or(&0)
        ),
    )
}

/// Random connected graph on `n` vertices, made chordal.
fn random_chordal_pattern(n: usize, rng: &mut ChaCha8Rng) -> (Graph, Vec<Clique>) {
    let mut g = Graph::new(n);
    for i in 1..n {
        g.add_edge(i, rng.random_range(0..i));
    }
    let p = rng.random_range(0.0..0.5);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                g.add_edge(i, j);
            }
        }
    }
    let e = chordal_embed(&g).expect("embedding");
    let cliques = enumerate_cliques(&e).expect("cliques");
    (e.graph(), cliques)
}

/// Largest `t` such that the pattern entries of `m` admit a completion
/// `X` with `X − tI ⪰ 0`, from the interior-point solver on a one-block
/// problem over the free entries and `t`.
fn completion_margin(pattern: &Graph, m: &DMatrix<f64>) -> Option<f64> {
    let n = m.nrows();
    let free: Vec<(usize, usize)> =
        (0..n).flat_map(|j| (j + 1..n).map(move |i| (i, j))).filter(|&(i, j)| !pattern.has_edge(i, j)).collect();
    let n_y = free.len() + 1;
    let nx = svec_len(n);
    let sqrt2 = 2f64.sqrt();
    let mut b = DVector::zeros(nx);
    for j in 0..n {
        for i in j..n {
            if i == j || pattern.has_edge(i, j) {
                b[svec_index(n, i, j)] = if i == j { m[(i, j)] } else { sqrt2 * m[(i, j)] };
            }
        }
    }
    // x = b + Σ free entries − t·svec(I)
    let mut w = DMatrix::zeros(nx, n_y);
    for (f, &(i, j)) in free.iter().enumerate() {
        w[(svec_index(n, i, j), f)] = -sqrt2;
    }
    for i in 0..n {
        w[(svec_index(n, i, i), n_y - 1)] = 1.0;
    }
    let mut cost_y = DVector::zeros(n_y);
    cost_y[n_y - 1] = -1.0;
    let agent = AgentSubproblem {
        agent: 0,
        clique: Clique::new((0..n).collect()),
        support: (0..n_y).collect(),
        blocks: vec![BlockSpec { kind: BlockKind::Gram, order: n, offset: 0 }],
        q: DMatrix::identity(nx, nx),
        w,
        b,
        a: DMatrix::zeros(0, n_y),
        a_rhs: DVector::zeros(0),
        d: DMatrix::zeros(0, n_y),
        g: DVector::zeros(0),
        cost_y,
        cost_x: DVector::zeros(nx),
        offset: 0.0,
        ranges: Vec::new(),
        anchor_meas: Vec::new(),
    };
    let sdp = CoupledSdp::from_agents(vec![agent], n_y).expect("well-formed completion problem");
    let sol = solve_centralized(&sdp, &SolverOptions::default()).ok()?;
    sol.status.is_converged().then(|| sol.y()[n_y - 1])
}

fn c6_completion_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut disagree, mut failed, mut completable, mut indefinite_full) = (0, 0, 0, 0);
    for _ in 0..200 {
        let n = rng.random_range(2..=8);
        let (pattern, cliques) = random_chordal_pattern(n, &mut rng);
        let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let base = &g * g.transpose() / n as f64;
        let sub = |c: &Clique, m: &DMatrix<f64>| {
            let idx = c.members();
            DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
        };
        let lo = cliques.iter().map(|c| min_eigenvalue(&sub(c, &base))).fold(f64::INFINITY, f64::min);
        // shift so the smallest clique eigenvalue lands at ±[0.01, 0.3]
        let u = rng.random_range(0.01..0.3) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let m = base - DMatrix::identity(n, n) * (lo - u);
        let cliques_psd = cliques.iter().all(|c| min_eigenvalue(&sub(c, &m)) >= 0.0);
        if cliques_psd && min_eigenvalue(&m) < 0.0 {
            indefinite_full += 1;
        }
        match completion_margin(&pattern, &m) {
            Some(t) => {
                let exists = t >= -1e-6;
                completable += exists as usize;
                disagree += (exists != cliques_psd) as usize;
            }
            None => failed += 1,
        }
    }
    outcome(
        disagree == 0 && failed == 0,
        format!(
            "{disagree} disagreements, {failed} unsolved; {completable}/200 completable, {indefinite_full} of them from an indefinite full matrix"
        ),
    )
}

fn c7_zero_noise() -> Outcome {
    let opts = SolverOptions::default();
    let mut worst = f64::NEG_INFINITY;
    for (k, n) in (3..=10).enumerate() {
        let scn = scenario(n, 4, 0.5, 0.3, 0.0, 70 + k as u64);
        let p = problem(&scn);
        let sol = solve_centralized(&p.sdp, &opts).expect("solve");
        if !sol.status.is_converged() {
            return outcome(false, format!("{n}-sensor fixture: {}", sol.status.label()));
        }
        worst = worst.max(sol.objective);
    }
    outcome(worst <= 1e-6, format!("largest objective {worst:.2e} over 8 fixtures"))
}

fn c8_noise_monotonicity() -> Outcome {
    let opts = SolverOptions::default();
    let mut means = Vec::new();
    let mut unconverged = 0;
    let placements = generate_runs(20, 9, &[0.5, 0.5], 0.2, 2000, 25).expect("scenarios");
    for sigma in [0.01, 0.1, 0.3] {
        let mut total = 0.0;
        for geo in &placements {
            let scn = synthesize_measurements(geo, sigma, sigma, geo.seed).expect("measurements");
            let p = problem(&scn);
            let d = solve_distributed(&p.sdp, &tree_of(&p), &opts).expect("distributed");
            unconverged += !d.solution.status.is_converged() as usize;
            let est = extract_positions(&p.sdp.index, d.solution.y()).expect("positions");
            let e = rmse(scn.sensors_true.as_ref().unwrap(), &[est]).expect("rmse");
            total += e;
        }
        means.push(total / 25.0);
    }
    outcome(
        means[0] < means[1] && means[1] < means[2],
        format!(
            "mean RMSE {:.4} < {:.4} < {:.4} ({unconverged} runs unconverged)",
            means[0], means[1], means[2]
        ),
    )
}

fn c9_kernels() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut fails = [0usize; 4];
    let sym = |rng: &mut ChaCha8Rng, n: usize| -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        (&a + a.transpose()) * 0.5
    };
    for _ in 0..500 {
        let n = rng.random_range(1..=8);
        let (x, y) = (sym(&mut rng, n), sym(&mut rng, n));
        let v = svec(&x).unwrap();
        fails[0] += ((smat(&v).unwrap() - &x).amax() > 1e-14) as usize;
        fails[1] += ((v.dot(&svec(&y).unwrap()) - x.component_mul(&y).sum()).abs() > 1e-12) as usize;
        let lhs = skron(&x, &x).unwrap() * svec(&y).unwrap();
        fails[2] += ((lhs - svec(&(&x * &y * &x)).unwrap()).amax() > 1e-12) as usize;
        let spd = |m: DMatrix<f64>| &m * &m + DMatrix::identity(n, n) * 0.1;
        let (xp, zp) = (spd(x), spd(y));
        let ok = nt_scaling(&xp, &zp).is_ok_and(|s| (&s.w_scal * &zp * &s.w_scal - &xp).norm() / xp.norm() <= 1e-9);
        fails[3] += !ok as usize;
    }
    outcome(
        fails.iter().all(|&f| f == 0),
        format!("failures: round-trip {}, inner product {}, skron {}, NT {} (500 each)", fails[0], fails[1], fails[2], fails[3]),
    )
}

fn c10_formula_audit() -> Outcome {
    let mut fixtures = small_fixtures();
    fixtures.push(ten_sensors());
    fixtures.push(fifty_sensors(7));
    fixtures.push(scenario(20, 9, 0.5, 0.2, 0.01, 2000));
    let one_step = SolverOptions { max_iters: 1, ..Default::default() };
    let mut agents = 0;
    for scn in &fixtures {
        let p = problem(scn);
        let tree = tree_of(&p);
        let d = solve_distributed(&p.sdp, &tree, &one_step).expect("one iteration");
        for (node, a) in tree.nodes().iter().zip(&p.sdp.agents) {
            let (c, b, an) = (a.clique.len(), a.ranges.len(), a.anchor_meas.len());
            let (n_k, e_k) = (formula_n_k(2, c, b, an), formula_e_k(2, c, b, an));
            let s_k = if node.parent.is_some() { formula_s_k(2, node.shared_sensors.len()) } else { 0 };
            if a.n_vars() != n_k || a.n_eq() != e_k || d.factor_orders[node.id] != n_k - s_k + e_k {
                return outcome(false, format!("agent {} of a {}-sensor fixture", node.id, scn.n_sensors()));
            }
            agents += 1;
        }
    }
    outcome(true, format!("{agents} agents over {} fixtures", fixtures.len()))
}

fn main() {
    let started = Instant::now();
    let mut results = Vec::new();
    let mut run = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let line = format!(
            "criterion {id:>2} {} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        println!("{line}");
        results.push(o.pass);
    };
    run(1, "direction equivalence", &mut c1_direction_equivalence);
    let mut paired = Vec::new();
    run(2, "full-solve equivalence", &mut || {
        paired = paired_runs();
        c2_full_solve(&paired)
    });
    run(3, "KKT residuals at the solution", &mut || c3_kkt_residuals(&paired));
    run(4, "communication accounting", &mut c4_communication);
    run(5, "iteration count", &mut c5_iteration_count);
    run(6, "PSD completion oracle", &mut c6_completion_oracle);
    run(7, "zero-noise exactness", &mut c7_zero_noise);
    run(8, "noise monotonicity", &mut c8_noise_monotonicity);
    run(9, "kernel identities", &mut c9_kernels);
    run(10, "complexity formulas", &mut c10_formula_audit);
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} passed in {:.1}s", results.len(), started.elapsed().as_secs_f64());
    if passed != results.len() {
        std::process::exit(1);
    }
}
