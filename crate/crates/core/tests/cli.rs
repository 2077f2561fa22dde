use std::process::Command;

fn toruslab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_toruslab"))
}

#[test]
fn residue_scaling_writes_reports_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let status = toruslab().args(["residue-scaling", "--out"]).arg(dir.path()).output().unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let csv = std::fs::read_to_string(dir.path().join("residue_scaling.csv")).unwrap();
    assert!(csv.starts_with("n,grid_size,steps,dt,measured,envelope\n"));
    assert_eq!(csv.lines().count(), 6);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["experiment"], "residue_scaling");
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["predicted_slope"], -6.5);
    assert_eq!(summary["tolerance"], 0.05);
    assert!(summary["fitted_slope"].as_f64().is_some());
}

#[test]
fn failing_run_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n_list": [8], "exact_tolerance": 1e-20}"#).unwrap();
    let out = toruslab()
        .args(["exact-check", "--threads", "1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], false);
    assert_eq!(summary["params"]["experiment"], "exact_check");
}

#[test]
fn invalid_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"sigma": 3.0}"#).unwrap();
    let out = toruslab().args(["residue-scaling", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma"));
}

#[test]
fn inequalities_are_reproducible_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"inequalities": {"family_size": 8, "coarse_n": 32, "fine_n": 64, "probes": 3}}"#).unwrap();
    let run = |sub: &str, seed: &str| {
        let out_dir = dir.path().join(sub);
        let st = toruslab()
            .args(["inequalities", "--seed", seed, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(st.status.success());
        std::fs::read(out_dir.join("inequalities.csv")).unwrap()
    };
    let a = run("a", "11");
    assert_eq!(a, run("b", "11"));
    assert_ne!(a, run("c", "12"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("check,sigma,s_or_k,tau,family_size,max_ratio,max_ratio_refined,equality_cases\n"));
}
