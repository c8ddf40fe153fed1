use std::path::Path;
use std::process::{Command, Output};

fn netpricing(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netpricing"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn list_prints_presets() {
    let o = netpricing(&["simulate", "--list"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for name in ["setup1-b1", "setup2-rho0.5", "setup4-imb0.8-n1000", "setup9-binf"] {
        assert!(out.lines().any(|l| l == name), "missing {name}");
    }
}

#[test]
fn simulate_slope_and_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = netpricing(&[
        "simulate",
        "--scenario",
        "setup2-rho0.3",
        "--policies",
        "psgd,oracle",
        "--seeds",
        "2",
        "--horizon",
        "200",
        "--out",
        path(&out),
        "--parallel",
        "2",
        "--seed",
        "7",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "results.csv",
        "summary.csv",
        "drift.csv",
        "failures.csv",
        "scenarios.json",
        "regret_setup2-rho0.3.svg",
    ] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let results = std::fs::read_to_string(out.join("results.csv")).unwrap();
    // header plus 2 policies x 2 seeds x 200 rounds
    assert_eq!(results.lines().count(), 1 + 2 * 2 * 200);

    let results_path = out.join("results.csv");
    let o = netpricing(&[
        "slope",
        "--input",
        path(&results_path),
        "--scenario",
        "setup2-rho0.3",
        "--policy",
        "psgd",
    ]);
    assert!(o.status.success());
    let slope: f64 = stdout(&o).split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(slope > 0.0 && slope < 1.5, "{slope}");

    let summary = std::fs::read(out.join("summary.csv")).unwrap();
    std::fs::remove_file(out.join("summary.csv")).unwrap();
    let o = netpricing(&["report", "--in", path(&out)]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(out.join("summary.csv")).unwrap(), summary);
}

#[test]
fn simulate_is_seed_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = netpricing(&[
            "simulate",
            "--scenario",
            "setup1-b1",
            "--policies",
            "psgd",
            "--seeds",
            "2",
            "--horizon",
            "50",
            "--out",
            path(&out),
            "--seed",
            seed,
        ]);
        assert!(o.status.success());
        std::fs::read(out.join("results.csv")).unwrap()
    };
    let a = run("a", "1");
    assert_eq!(a, run("b", "1"));
    assert_ne!(a, run("c", "2"));
}

#[test]
fn simulate_accepts_json_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.json");
    std::fs::write(
        &cfg,
        r#"{
            "name": "tiny", "segments": 2, "horizon": 40, "seeds": 2,
            "network": {"kind": "explicit", "weights": [[0, 1], [1, 0]]},
            "rho": 0.4, "beta_init": -0.5, "mu_init": [0.1],
            "arrivals": {"plan": "uniform", "count": 10},
            "policies": ["psgd", "unshrunken"]
        }"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let o = netpricing(&["simulate", "--scenario", path(&cfg), "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("tiny psgd") && text.contains("tiny unshrunken"));
}

#[test]
fn network_build_writes_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let features = dir.path().join("f.csv");
    std::fs::write(&features, "id,x,y\na,0,0\nb,1,0\nc,5,5\n").unwrap();
    let out = dir.path().join("net.csv");
    let o = netpricing(&[
        "network",
        "build",
        "--features",
        path(&features),
        "--width",
        "1",
        "--threshold",
        "0.01",
        "--out",
        path(&out),
        "--raw",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# sar-network L=3"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(row[0], 0.0);
    assert!((row[1] - (-0.5f64).exp()).abs() < 1e-12);
    assert_eq!(row[2], 0.0);
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    assert_eq!(
        netpricing(&["simulate", "--scenario", "no-such-preset", "--out", path(&out)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        netpricing(&["simulate", "--scenario", "setup1-b1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        netpricing(&["slope", "--input", "x.csv", "--scenario", "s", "--policy", "greedy"])
            .status
            .code(),
        Some(2)
    );

    let missing = dir.path().join("missing");
    assert_eq!(netpricing(&["report", "--in", path(&missing)]).status.code(), Some(4));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(
        netpricing(&["simulate", "--scenario", path(&bad), "--out", path(&out)])
            .status
            .code(),
        Some(2)
    );

    // a path graph with rho past the feasible bound is a configuration error
    let infeasible = dir.path().join("rho.json");
    std::fs::write(
        &infeasible,
        r#"{"name": "r", "segments": 2, "horizon": 5, "seeds": 1,
            "network": {"kind": "explicit", "weights": [[0, 1], [1, 0]]},
            "rho": 3.0, "beta_init": -0.5, "mu_init": [0.1],
            "arrivals": {"plan": "uniform", "count": 1}}"#,
    )
    .unwrap();
    assert_eq!(
        netpricing(&["simulate", "--scenario", path(&infeasible), "--out", path(&out)])
            .status
            .code(),
        Some(2)
    );

    // all-zero regret has no log-log slope
    let results = dir.path().join("zero.csv");
    std::fs::write(
        &results,
        "scenario,policy,seed,t,cum_regret\ns,oracle,0,1,0\ns,oracle,0,2,0\ns,oracle,0,3,0\n",
    )
    .unwrap();
    assert_eq!(
        netpricing(&[
            "slope",
            "--input",
            path(&results),
            "--scenario",
            "s",
            "--policy",
            "oracle"
        ])
        .status
        .code(),
        Some(3)
    );
}
