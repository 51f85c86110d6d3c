use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn treeloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treeloc")).args(args).output().expect("spawn treeloc")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Rows of a CSV file as maps from header to field.
fn table(path: &Path) -> Vec<std::collections::HashMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(str::to_string).collect();
    r.records()
        .map(|rec| header.iter().cloned().zip(rec.unwrap().iter().map(str::to_string)).collect())
        .collect()
}

const SMALL: [&str; 10] = ["--sensors", "6", "--anchors", "4", "--area", "0.5x0.5", "--rc", "0.3", "--seed", "70"];

fn generate(dir: &Path, noise: &str, runs: &str) -> PathBuf {
    let out = dir.join("scenarios");
    let mut args = vec!["generate"];
    args.extend(SMALL);
    args.extend(["--noise", noise, "--runs", runs, "--out", arg(&out)]);
    let o = treeloc(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn zero_noise_distributed_run_converges_to_zero_objective() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("res");
    let mut args = vec!["solve"];
    args.extend(SMALL);
    args.extend(["--noise", "0", "--solver", "distributed", "--out", arg(&out)]);
    let o = treeloc(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = table(&out.join("results.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["run_id"], "sigma-0/run-000");
    assert_eq!(rows[0]["status"], "converged");
    let obj: f64 = rows[0]["objective"].parse().unwrap();
    assert!(obj.abs() <= 1e-6, "objective {obj}");
    let iters: usize = rows[0]["iters"].parse().unwrap();
    assert_eq!(rows[0]["per_agent_comms"].parse::<usize>().unwrap(), 6 * iters);
    assert!(out.join("estimates/sigma-0/run-000.json").is_file());
}

#[test]
fn centralized_and_distributed_estimates_agree() {
    let dir = TempDir::new().unwrap();
    let scn = generate(dir.path(), "0.05", "2");
    let mut rmse = Vec::new();
    for solver in ["centralized", "distributed"] {
        let out = dir.path().join(solver);
        let o = treeloc(&["solve", "--input", arg(&scn), "--solver", solver, "--out", arg(&out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let rows = table(&out.join("results.csv"));
        assert!(rows.iter().all(|r| r["solver"] == solver));
        if solver == "centralized" {
            assert!(rows.iter().all(|r| r["per_agent_comms"].is_empty()));
        }
        rmse.push(rows.iter().map(|r| r["rmse"].parse::<f64>().unwrap()).collect::<Vec<_>>());
    }
    assert_eq!(rmse[0].len(), 2);
    for (c, d) in rmse[0].iter().zip(&rmse[1]) {
        assert!((c - d).abs() <= 1e-6, "{c} vs {d}");
    }
}

#[test]
fn scenario_without_truth_leaves_rmse_empty() {
    let dir = TempDir::new().unwrap();
    let scn = generate(dir.path(), "0.01", "1");
    let file = scn.join("sigma-0.01/run-000.json");
    let mut json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
    json.as_object_mut().unwrap().remove("sensors_true");
    let blind = dir.path().join("blind.json");
    fs::write(&blind, json.to_string()).unwrap();
    let out = dir.path().join("res");
    let o = treeloc(&["solve", "--input", arg(&blind), "--out", arg(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = table(&out.join("results.csv"));
    assert_eq!(rows[0]["run_id"], "blind");
    assert_eq!(rows[0]["rmse"], "");
    let est: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("estimates/blind.json")).unwrap()).unwrap();
    assert!(est["rmse"].is_null());
    assert_eq!(est["estimated_positions"].as_array().unwrap().len(), 6);
}

#[test]
fn generate_writes_one_file_per_run_and_level() {
    let dir = TempDir::new().unwrap();
    let single = generate(dir.path(), "0.01", "1");
    let files: Vec<_> = fs::read_dir(single.join("sigma-0.01")).unwrap().collect();
    assert_eq!(files.len(), 1);

    let out = dir.path().join("sweep");
    let mut args = vec!["generate"];
    args.extend(SMALL);
    args.extend(["--noise", "0.01", "--noise", "0.1", "--runs", "3", "--out", arg(&out)]);
    assert_eq!(code(&treeloc(&args)), 0);
    for level in ["sigma-0.01", "sigma-0.1"] {
        for r in 0..3 {
            assert!(out.join(format!("{level}/run-{r:03}.json")).is_file());
        }
    }
}

#[test]
fn report_averages_per_run_rmse() {
    let dir = TempDir::new().unwrap();
    let results = dir.path().join("results.csv");
    fs::write(
        &results,
        "run_id,solver,status,iters,per_agent_comms,tree_height,rmse,objective,wall_time_s\n\
         sigma-0.1/run-000,distributed,converged,20,120,2,0,1.5,0.1\n\
         sigma-0.1/run-001,distributed,converged,22,132,2,0.2,1.7,0.1\n",
    )
    .unwrap();
    let out = dir.path().join("report.csv");
    let o = treeloc(&["report", arg(&results), "--out", arg(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = table(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["noise"].parse::<f64>().unwrap(), 0.1);
    assert!((rows[0]["rmse_mean"].parse::<f64>().unwrap() - 0.1).abs() < 1e-15);
    assert_eq!(rows[0]["rmse_min"], "0.0");
    assert_eq!(rows[0]["rmse_max"], "0.2");
    assert_eq!(rows[0]["iters_max"], "22");
    assert_eq!(rows[0]["comms_mean"], "126.0");
    assert_eq!(rows[0]["runs"], "2");
}

#[test]
fn sweep_report_rmse_grows_with_noise() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("res");
    let o = treeloc(&[
        "solve", "--sensors", "20", "--anchors", "9", "--area", "0.5x0.5", "--rc", "0.2", "--seed", "2000",
        "--noise", "0.01", "--noise", "0.3", "--runs", "25", "--out", arg(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = dir.path().join("report.csv");
    assert_eq!(code(&treeloc(&["report", arg(&out), "--out", arg(&report)])), 0);
    let rows = table(&report);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r["runs"] == "25" && r["converged"] == "25"));
    let mean = |i: usize| rows[i]["rmse_mean"].parse::<f64>().unwrap();
    assert!(mean(0) < mean(1), "{} vs {}", mean(0), mean(1));
}

/// Everything but wall time must repeat exactly.
#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir.path().join("a"), "0.05", "2");
    let b = generate(&dir.path().join("b"), "0.05", "2");
    for f in ["sigma-0.05/run-000.json", "sigma-0.05/run-001.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }

    let solve = |name: &str| {
        let out = dir.path().join(name);
        let o = treeloc(&["solve", "--input", arg(&a), "--out", arg(&out), "--trace", "--dump"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (x, y) = (solve("x"), solve("y"));
    let strip = |p: &Path| -> Vec<String> {
        fs::read_to_string(p).unwrap().lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect()
    };
    assert_eq!(strip(&x.join("results.csv")), strip(&y.join("results.csv")));
    for run in ["sigma-0.05/run-000", "sigma-0.05/run-001"] {
        for f in [format!("traces/{run}.csv"), format!("comm/{run}.csv"), format!("subproblems/{run}.json")] {
            assert_eq!(fs::read(x.join(&f)).unwrap(), fs::read(y.join(&f)).unwrap(), "{f}");
        }
        let est = |root: &Path| {
            let mut v: serde_json::Value =
                serde_json::from_str(&fs::read_to_string(root.join(format!("estimates/{run}.json"))).unwrap()).unwrap();
            v.as_object_mut().unwrap().remove("wall_time_s");
            v
        };
        assert_eq!(est(&x), est(&y));
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = arg(dir.path());
    let scn = generate(dir.path(), "0.01", "1");

    // not converged
    let o = treeloc(&["solve", "--input", arg(&scn), "--max-iters", "2", "--out", out]);
    assert_eq!(code(&o), 1);
    let rows = table(&dir.path().join("results.csv"));
    assert_eq!(rows[0]["status"], "max-iterations");

    // input errors
    assert_eq!(code(&treeloc(&["solve", "--out", out])), 2);
    assert_eq!(code(&treeloc(&["solve", "--input", arg(&scn), "--sensors", "4", "--out", out])), 2);
    assert_eq!(code(&treeloc(&["solve", "--input", "/nonexistent/x.json", "--out", out])), 2);
    assert_eq!(code(&treeloc(&["solve", "--sensors", "5", "--runs", "0", "--out", out])), 2);
    assert_eq!(code(&treeloc(&["solve", "--sensors", "5", "--noise", "-0.1", "--out", out])), 2);
    assert_eq!(code(&treeloc(&["solve", "--sensors", "5", "--area", "1", "--out", out])), 2);
    assert_eq!(code(&treeloc(&["solve", "--input", arg(&scn), "--gamma", "1.5", "--out", out])), 2);
    assert_eq!(code(&treeloc(&["solve", "--input", arg(&scn), "--root", "99", "--out", out])), 2);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"dim": 2, "rc": "far"}"#).unwrap();
    let o = treeloc(&["solve", "--input", arg(&bad), "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("rc"));
    let wrong = dir.path().join("wrong.csv");
    fs::write(&wrong, "run,solver\nx,distributed\n").unwrap();
    assert_eq!(code(&treeloc(&["report", arg(&wrong)])), 2);
    assert_eq!(code(&treeloc(&["generate", "--out", out])), 2);
}
