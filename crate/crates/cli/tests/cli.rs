use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_shifted-sdca"));
    cmd.env("RUST_LOG", "error");
    cmd
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn simulated_poisson(dir: &TempDir) -> PathBuf {
    ok(
        dir.path(),
        &[
            "simulate-poisson",
            "--n0",
            "200",
            "--d",
            "6",
            "--nnz",
            "4",
            "--seed",
            "7",
            "--out",
            "p.csv",
        ],
    );
    dir.path().join("p.csv")
}

fn csv_column(path: &Path, name: &str) -> Vec<Option<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| {
            let field = l.split(',').nth(k).unwrap();
            (!field.is_empty()).then(|| field.parse().unwrap())
        })
        .collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn poisson_fit_writes_monotone_dual_trace() {
    let dir = tempfile::tempdir().unwrap();
    simulated_poisson(&dir);
    let stdout = ok(
        dir.path(),
        &[
            "fit",
            "--model",
            "poisson",
            "--data",
            "p.csv",
            "--solver",
            "sdca",
            "--init",
            "heuristic",
            "--tol",
            "1e-10",
            "--trace",
            "t.csv",
        ],
    );
    assert!(stdout.contains("converged   true"), "{stdout}");

    let trace = dir.path().join("t.csv");
    let header = std::fs::read_to_string(&trace).unwrap();
    assert!(header.starts_with("epoch,time_s,dual,primal,gap\n"));
    let dual: Vec<f64> = csv_column(&trace, "dual")
        .into_iter()
        .map(Option::unwrap)
        .collect();
    assert!(dual.len() > 2);
    for pair in dual.windows(2) {
        assert!(
            pair[1] >= pair[0] - 1e-12 * pair[0].abs().max(1.0),
            "{pair:?}"
        );
    }
    let gap = csv_column(&trace, "gap").last().copied().flatten().unwrap();
    assert!((0.0..=1e-10).contains(&gap));

    let result = json(&dir.path().join("result.json"));
    assert_eq!(result["model"], "poisson");
    assert_eq!(result["result"]["converged"], true);
    assert_eq!(result["result"]["w"].as_array().unwrap().len(), 6);
    assert_eq!(result["d"], 6);
}

#[test]
fn rates_report_has_expected_schema() {
    let dir = tempfile::tempdir().unwrap();
    simulated_poisson(&dir);
    ok(dir.path(), &["rates", "--data", "p.csv", "--out", "r.json"]);
    let report = json(&dir.path().join("r.json"));
    let mut keys: Vec<_> = report.as_object().unwrap().keys().cloned().collect();
    keys.sort();
    assert_eq!(keys, ["R", "beta", "rho", "sigma", "sigma_bar", "sigma_sc"]);

    let vec = |k: &str| -> Vec<f64> {
        report[k]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect()
    };
    let (sigma, sigma_sc, r) = (vec("sigma"), vec("sigma_sc"), vec("R"));
    assert!(!sigma.is_empty());
    for ((s, sc), r) in sigma.iter().zip(&sigma_sc).zip(&r) {
        assert!(s >= sc, "sigma {s} < sigma_sc {sc}");
        assert!(*r >= 1.0);
    }
    let rho_sum: f64 = vec("rho").iter().sum();
    assert!((rho_sum - 1.0).abs() < 1e-12);
    let min_sigma = sigma.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(report["sigma_bar"].as_f64().unwrap() >= min_sigma);
}

#[test]
fn rates_without_nonneg_gram_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s.csv"), "1,1,0.1\n2,-1,2\n3,1,1\n").unwrap();
    let out = run(dir.path(), &["rates", "--data", "s.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("--scaling minmax"), "{stderr}");
    assert_eq!(stderr.lines().count(), 1);
}

#[test]
fn simulate_hawkes_is_byte_identical_for_one_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "simulate-hawkes",
            "--nodes",
            "2",
            "--decays",
            "0.8,4",
            "--horizon",
            "200",
            "--inhibitory",
            "1",
            "--seed",
            "11",
            "--out",
            out,
        ]
    };
    ok(dir.path(), &args("a.json"));
    ok(dir.path(), &args("b.json"));
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    assert_eq!(read("a.truth.json"), read("b.truth.json"));

    let data = json(&dir.path().join("a.json"));
    assert_eq!(data["T"], 200.0);
    assert_eq!(data["events"].as_array().unwrap().len(), 2);
}

#[test]
fn hawkes_fit_writes_model_and_node_traces() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "simulate-hawkes",
            "--nodes",
            "2",
            "--decays",
            "1.0",
            "--horizon",
            "300",
            "--seed",
            "3",
            "--out",
            "h.json",
        ],
    );
    ok(
        dir.path(),
        &[
            "fit",
            "--model",
            "hawkes",
            "--data",
            "h.json",
            "--out-dir",
            "fit",
            "--trace",
            "t.csv",
            "--result",
            "m.json",
        ],
    );
    let fit = dir.path().join("fit");
    assert!(fit.join("t_node0.csv").exists() && fit.join("t_node1.csv").exists());
    let model = json(&fit.join("m.json"));
    assert_eq!(model["mu"].as_array().unwrap().len(), 2);
    assert_eq!(model["adjacency"][1][0].as_array().unwrap().len(), 1);
    assert_eq!(model["decays"], serde_json::json!([1.0]));
}

#[test]
fn fit_is_deterministic_apart_from_timings() {
    let dir = tempfile::tempdir().unwrap();
    simulated_poisson(&dir);
    for name in ["a", "b"] {
        ok(
            dir.path(),
            &[
                "fit",
                "--model",
                "poisson",
                "--data",
                "p.csv",
                "--seed",
                "5",
                "--sampling",
                "importance",
                "--trace",
                &format!("{name}.csv"),
                "--result",
                &format!("{name}.json"),
            ],
        );
    }
    assert_eq!(
        std::fs::read(dir.path().join("a.json")).unwrap(),
        std::fs::read(dir.path().join("b.json")).unwrap()
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(csv_column(&a, "dual"), csv_column(&b, "dual"));
    assert_eq!(csv_column(&a, "primal"), csv_column(&b, "primal"));
}

#[test]
fn compare_writes_traces_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    simulated_poisson(&dir);
    ok(
        dir.path(),
        &[
            "compare",
            "--data",
            "p.csv",
            "--solvers",
            "sdca,newton",
            "--out-dir",
            "cmp",
        ],
    );
    let cmp = dir.path().join("cmp");
    assert!(cmp.join("trace_sdca.csv").exists() && cmp.join("trace_newton.csv").exists());
    let summary = json(&cmp.join("summary.json"));
    let reference = summary["reference_objective"].as_f64().unwrap();
    let solvers = summary["solvers"].as_array().unwrap();
    assert_eq!(solvers.len(), 2);
    for s in solvers {
        let fin = s["final_objective"].as_f64().unwrap();
        assert!(fin >= reference && fin - reference < 1e-8);
        assert!(s["time_to_target"].as_f64().is_some());
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sim.toml"),
        "n0 = 50\nd = 3\nseed = 1\nout = \"from_config.csv\"\n",
    )
    .unwrap();
    ok(
        dir.path(),
        &[
            "simulate-poisson",
            "--config",
            "sim.toml",
            "--out",
            "from_flag.csv",
        ],
    );
    assert!(dir.path().join("from_flag.csv").exists());
    assert!(!dir.path().join("from_config.csv").exists());
    let rows = std::fs::read_to_string(dir.path().join("from_flag.csv")).unwrap();
    assert_eq!(rows.lines().count(), 50);
    assert_eq!(rows.lines().next().unwrap().split(',').count(), 4);

    std::fs::write(dir.path().join("bad.toml"), "n0 = 50\nunknown_key = 1\n").unwrap();
    let out = run(dir.path(), &["simulate-poisson", "--config", "bad.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| run(dir.path(), args).status.code();
    assert_eq!(code(&["no-such-command"]), Some(1));
    assert_eq!(code(&["fit", "--model", "poisson"]), Some(1));
    assert_eq!(
        code(&["fit", "--model", "poisson", "--data", "missing.csv"]),
        Some(1)
    );
    assert_eq!(
        code(&["fit", "--model", "poisson", "--tol", "abc"]),
        Some(1)
    );

    // An explosive ground truth makes the simulator give up.
    std::fs::write(
        dir.path().join("explosive.json"),
        r#"{"mu":[1.0],"adjacency":[[[3.0]]],"decays":[1.0]}"#,
    )
    .unwrap();
    let out = run(
        dir.path(),
        &[
            "simulate-hawkes",
            "--truth",
            "explosive.json",
            "--horizon",
            "1e6",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
}
