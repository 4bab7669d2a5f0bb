use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conesmooth"))
        .args(args)
        .env_remove("CONESMOOTH_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn orthant_core_json() {
    let o = run(&["core", "--cone", "orthant", "--d", "3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["center"], serde_json::json!([1.0, 1.0, 1.0]));
    let w = v["width"].as_f64().unwrap();
    assert!((w - (3f64.sqrt() - 1.0)).abs() < 1e-15);
    assert_eq!(v["unique"], true);
}

#[test]
fn relu_min_general_at_zero() {
    let o = run(&["smooth-eval", "--family", "relu", "--variant", "min-general", "--beta", "1", "--x", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "0.0625");
}

#[test]
fn negative_coordinates_parse() {
    let o = run(&[
        "smooth-eval", "--family", "max", "--variant", "max-outer", "--beta", "2", "--x", "-1,2", "--format", "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    // far from the kink the smoothing is max(x) − w/β
    assert!((v["value"].as_f64().unwrap() - (2.0 - 0.25 / 2.0)).abs() < 1e-12);
}

#[test]
fn validation_errors_exit_2() {
    assert_eq!(run(&["core", "--cone", "nope", "--d", "2"]).status.code(), Some(2));
    assert_eq!(run(&["smooth-eval", "--family", "relu", "--beta", "1", "--x", "0"]).status.code(), Some(2));
    assert_eq!(
        run(&["smooth-eval", "--family", "relu", "--variant", "min-inner", "--beta", "-1", "--x", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["core"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    // one iteration cannot reach the target gap
    let o = run(&["bench", "minimax", "--n", "16", "--d", "4", "--eps", "1e-6", "--max-iter", "1"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"cone": "soc", "d": 2}"#).unwrap();
    let cfg = cfg.to_str().unwrap();

    let v: serde_json::Value = serde_json::from_str(&stdout(&run(&["core", "--config", cfg]))).unwrap();
    assert_eq!(v["name"], "soc");
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&run(&["core", "--config", cfg, "--cone", "orthant"]))).unwrap();
    assert_eq!(v["name"], "orthant");
    assert_eq!(v["center"], serde_json::json!([1.0, 1.0]));
}

#[test]
fn config_with_function_descriptor() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"function": {"family": "polytope-support", "dim": 2, "vertices": [[1, 0], [0, 1], [-1, -1]]},
            "variant": "min-general", "beta": 1, "x": [0, 0], "format": "json"}"#,
    )
    .unwrap();
    let o = run(&["smooth-eval", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["value"].as_f64().unwrap().is_finite());

    std::fs::write(&cfg, r#"{"not-an-option": 1}"#).unwrap();
    assert_eq!(run(&["core", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn inline_descriptor_round_trip() {
    let o = run(&["core", "--family", r#"{"family":"max","dim":4}"#]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["width"].as_f64().unwrap() - 0.375).abs() < 1e-15);
}

#[test]
fn artifacts_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&["figure", "two-norm", "--n", "41", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    assert!(text.starts_with("x1,norm,f1,f2,f3,f4,f5\n"));
    assert_eq!(text.lines().count(), 42);
    assert!(!text.contains('\r'));

    let o1 = stdout(&run(&["core-estimate", "--cone", "soc", "--d", "2", "--n", "400", "--seed", "3"]));
    let o2 = stdout(&run(&["core-estimate", "--cone", "soc", "--d", "2", "--n", "400", "--seed", "3"]));
    assert_eq!(o1, o2);
}

#[test]
fn seed_falls_back_to_environment() {
    let with_env = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_conesmooth"))
            .args(["core-estimate", "--cone", "soc", "--d", "2", "--n", "300"])
            .env("CONESMOOTH_SEED", seed)
            .output()
            .unwrap()
    };
    let v: serde_json::Value = serde_json::from_slice(&with_env("11").stdout).unwrap();
    assert_eq!(v["seed"], 11);
    let o = run(&["core-estimate", "--cone", "soc", "--d", "2", "--n", "300", "--seed", "5"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["seed"], 5);
}

#[test]
fn exp_cone_figure_has_five_sets() {
    let o = run(&["figure", "exp-cone", "--n", "20", "--seed", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("set,x,y,z"));
    for set in ["K", "xK+K", "C_K", "s_in", "S_in"] {
        assert!(text.lines().any(|l| l.starts_with(&format!("{set},"))), "missing {set}");
    }
}

#[test]
fn bench_csv_columns() {
    let o = run(&["bench", "minimax", "--n", "16", "--d", "4", "--eps", "0.05"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("surrogate,n,d,eps,eta,iterations,final_gap,time_ms"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("optimal,16,4,"));
    assert!(rows[1].starts_with("logsumexp,16,4,"));
}

#[test]
fn verify_composite_json() {
    let o = run(&["verify", "--suite", "composite", "--seed", "7", "--json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reports = v.as_array().unwrap();
    assert!(!reports.is_empty());
    assert!(reports.iter().all(|r| r["pass"] == true));
}

#[test]
fn hausdorff_cone_report() {
    let o = run(&["hausdorff", "--cone", "soc", "--d", "2", "--variant", "min-outer", "--beta", "1", "--n", "40"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let (m, b) = (v["measured"].as_f64().unwrap(), v["bound"].as_f64().unwrap());
    assert!(m <= b * (1.0 + 1e-6) + 1e-9, "{m} > {b}");
}

#[test]
fn core_estimate_file_keeps_normals() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("core.json");
    let o = run(&["core", "estimate", "--cone", "orthant", "--d", "2", "--n", "200", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert!(!v["normals"].as_array().unwrap().is_empty());
    let w = v["width"].as_f64().unwrap();
    assert!((w - (2f64.sqrt() - 1.0)).abs() < 1e-3, "{w}");
}

#[test]
fn verify_json_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&["verify", "--suite", "composite", "--seed", "1", "--json", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert!(v.as_array().unwrap().iter().all(|r| r["pass"] == true));
}

#[test]
fn hausdorff_records_as_csv() {
    let o = run(&[
        "hausdorff", "--cone", "orthant", "--d", "2", "--variant", "min-inner", "--beta", "1", "--n", "8", "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("direction,boundary_k,boundary_s,gap"));
    let worst = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!((worst - (2f64.sqrt() - 1.0)).abs() < 1e-3, "{worst}");
}

#[test]
fn verify_all_passes_at_seed_7() {
    let o = run(&["verify", "--suite", "all", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().skip(1).all(|l| l.contains(",true,")));
}
