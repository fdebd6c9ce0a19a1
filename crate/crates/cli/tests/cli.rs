use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sigmafrac"));
    c.env_remove("SIGMAFRAC_QUAD_TOL");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn value_line(o: &Output) -> f64 {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix("value: "))
        .unwrap()
        .parse()
        .unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn deriv_examples() {
    let o = run(&[
        "deriv",
        "--kernel",
        "sigmoidal",
        "--alpha",
        "0.5",
        "--a",
        "0",
        "--t",
        "1",
        "--f",
        "linear",
        "--convention",
        "full",
    ]);
    assert_eq!(code(&o), 0);
    assert!((value_line(&o) - 2f64.tanh()).abs() < 1e-8);

    let o = run(&["deriv", "--alpha", "1.0", "--f", "sin", "--t", "0"]);
    assert_eq!(code(&o), 0);
    assert!((value_line(&o) - 1.0).abs() < 1e-12);
    assert!(stdout(&o).contains("classical"));

    let o = run(&[
        "deriv", "--kernel", "caputo", "--alpha", "0.5", "--f", "linear", "--a", "0", "--t", "1",
    ]);
    assert_eq!(code(&o), 0);
    assert!((value_line(&o) - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-7);
}

#[test]
fn deriv_json_carries_schema_and_convention() {
    let o = run(&[
        "deriv",
        "--alpha",
        "0.5",
        "--t",
        "1",
        "--f",
        "linear",
        "--convention",
        "paper",
        "--json",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["command"], "deriv");
    assert_eq!(v["config"]["convention"], "paper-half-mass");
    let half = v["results"][0]["value"].as_f64().unwrap();
    assert!((half - 2f64.tanh() / 2.0).abs() < 1e-8);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["deriv", "--alpha", "1.5", "--t", "1", "--f", "linear"][..],
        &["deriv", "--alpha", "0.5", "--t", "1", "--f", "nope"],
        &["deriv", "--alpha", "0.5", "--t", "1"],
        &["bogus"],
        &[
            "optimize",
            "--objective",
            "quadratic",
            "--mu",
            "0",
            "--alpha",
            "0.5",
            "--t0",
            "0",
        ],
    ] {
        assert_eq!(code(&run(args)), 2, "{args:?}");
    }
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn quadrature_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.toml");
    std::fs::write(
        &cfg,
        "[quad]\nmax_subdivisions = 1\nabs_tol = 1e-14\nrel_tol = 1e-14\n",
    )
    .unwrap();
    let o = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "deriv",
        "--alpha",
        "0.5",
        "--a=-3",
        "--t",
        "3",
        "--f",
        "abs-smooth",
    ]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("not-converged"));
}

#[test]
fn config_and_env_validation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "sed = 4\n").unwrap();
    let args = ["deriv", "--alpha", "0.5", "--t", "1", "--f", "linear"];
    let o = bin().arg("--config").arg(&cfg).args(args).output().unwrap();
    assert_eq!(code(&o), 2);

    let o = bin()
        .env("SIGMAFRAC_QUAD_TOL", "tight")
        .args(args)
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);

    let o = bin()
        .env("SIGMAFRAC_QUAD_TOL", "1e-9")
        .args(args)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);

    // The flag beats an invalid environment value.
    let o = bin()
        .env("SIGMAFRAC_QUAD_TOL", "1e-30")
        .args(["--quad-tol", "1e-9"])
        .args(args)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}

#[test]
fn csv_grid_input() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    let mut text = String::from("t,f\n");
    for i in 0..=200 {
        let t = i as f64 / 200.0;
        text.push_str(&format!("{t},{}\n", t.sin()));
    }
    std::fs::write(&grid, text).unwrap();
    let o = run(&[
        "deriv",
        "--alpha",
        "0.5",
        "--t",
        "1",
        "--f",
        grid.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!((value_line(&o) - 0.724_106_238_052_146_2).abs() < 1e-3);

    let o = run(&[
        "deriv",
        "--kernel",
        "caputo",
        "--alpha",
        "0.5",
        "--t",
        "1",
        "--f",
        grid.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn compare_writes_every_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.csv");
    let o = run(&[
        "compare",
        "--alpha",
        "0.3,0.7",
        "--t",
        "1",
        "--f",
        "sin",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = read(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "alpha,kernel,convention,value,err_estimate,n_evals,converged"
    );
    assert_eq!(lines.count(), 8);
}

#[test]
fn memory_example() {
    let o = run(&["memory", "--eps", "0.01", "--c0", "1", "--alpha", "0.5"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut rdr = text.lines();
    let header: Vec<&str> = rdr.next().unwrap().split(',').collect();
    let row: Vec<&str> = rdr.next().unwrap().split(',').collect();
    let col = |name: &str| -> f64 {
        let i = header.iter().position(|h| *h == name).unwrap();
        row[i].parse().unwrap()
    };
    assert!((col("sigmoidal_length") - 50f64.sqrt()).abs() < 1e-7);
    assert!((col("caputo_length") - 7.853_981_633_974_483e-5).abs() < 1e-9);
}

#[test]
fn transform_verify_example() {
    let o = run(&["transform-verify", "--s", "2"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let paper: f64 = row[2].parse().unwrap();
    let corrected: f64 = row[3].parse().unwrap();
    let oracle: f64 = row[4].parse().unwrap();
    assert!((paper - 2.386_294_4).abs() < 1e-7);
    assert!((corrected - 0.386_294_4).abs() < 1e-7);
    assert!((oracle - 0.386_294_4).abs() < 1e-7);
}

#[test]
fn optimize_runs() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let summary = dir.path().join("summary.json");
    let o = run(&[
        "optimize",
        "--objective",
        "quadratic",
        "--mu",
        "0.1",
        "--alpha",
        "0.9",
        "--t0",
        "0",
        "--trace",
        trace.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&read(&summary)).unwrap();
    let r = &v["results"][0];
    assert!(r["iterations"].as_u64().unwrap() > 0);
    assert!(r["distance_to_critical"].as_f64().unwrap().is_finite());
    assert!(read(&trace).starts_with("k,t_k,"));

    let o = run(&[
        "optimize",
        "--objective",
        "lasso-toy",
        "--lambda",
        "0.5",
        "--mu",
        "0.1",
        "--alpha",
        "0.5",
        "--t0",
        "0",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(read(&trace).contains("smoothed-l1"));

    let o = run(&[
        "optimize",
        "--objective",
        "rosenbrock-1d",
        "--mu",
        "0.9",
        "--alpha",
        "0.5",
        "--t0",
        "3",
    ]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["results"][0]["termination"], "diverged");
}

#[test]
fn fde_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sol.csv");
    let o = run(&[
        "fde",
        "--thm",
        "2.10",
        "--rhs",
        "linear-f",
        "--c0",
        "0.1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["results"][0]["converged"], true);
    let csv = read(&out);
    assert!(csv.starts_with("t,f,u\n"));
    assert_eq!(csv.lines().count(), 1002);

    let o = run(&["fde", "--thm", "2.9"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let r = v["results"][0]["max_residual"].as_f64().unwrap();
    assert!((r - 0.257_184_499_727_792_7).abs() < 1e-6);
    assert_eq!(v["findings"].as_array().unwrap().len(), 1);

    assert_eq!(code(&run(&["fde", "--thm", "2.10", "--c0", "50"])), 2);
}

#[test]
fn theorem_suite_reports() {
    let o = run(&["theorem-suite", "--only", "2.9"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["results"][0]["status"], "refuted-as-printed");
    assert!(v["results"][0]["metrics"]["max_residual"].as_f64().unwrap() > 0.1);
    assert!(!v["findings"].as_array().unwrap().is_empty());

    let o = run(&["theorem-suite", "--only", "2.3"]);
    assert_eq!(json(&o)["results"][0]["status"], "confirmed");

    assert_eq!(code(&run(&["theorem-suite", "--only", "9.9"])), 2);
}

#[test]
fn theorem_suite_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = run(&[
            "theorem-suite",
            "--convention",
            "both",
            "--seed",
            "7",
            "--report",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
    }
    let text = read(&a);
    assert_eq!(text, read(&b));
    let v: Value = serde_json::from_str(&text).unwrap();
    let status = |id: &str| {
        v["results"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["theorem"] == id && r["convention"] == "full-mass")
            .unwrap()["status"]
            .clone()
    };
    assert_eq!(status("2.1"), "confirmed");
    assert_eq!(status("2.7a"), "confirmed-with-correction");
    assert_eq!(v["results"].as_array().unwrap().len(), 24);
}
