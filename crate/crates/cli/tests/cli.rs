use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mtweight"));
    c.args(args).env_remove("MTWEIGHT_OUT_DIR");
    if let Some(d) = out_dir {
        c.env("MTWEIGHT_OUT_DIR", d);
    }
    c.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn constants_flags_printed_alternative() {
    let o = run(&["constants", "--alpha", "0", "--beta", "0", "--c0", "1"], None);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let a = v["constants"]["a_sharp"].as_f64().unwrap();
    assert!((a - 2.0 * std::f64::consts::PI).abs() < 1e-10);
    assert!((v["constants"]["a_sharp_printed"].as_f64().unwrap() - 4.0 * std::f64::consts::PI).abs() < 1e-10);
    assert_eq!(v["printed_comparison"]["printed_differs"], true);

    let o = run(&["constants", "--alpha", "1", "--beta", "0", "--c0", "1", "--format", "csv"], None);
    let s = stdout(&o);
    let row = s.lines().find(|l| l.starts_with("a_sharp,")).unwrap();
    let a: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((a - 2.828_43).abs() < 1e-5);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["constants"][..],
        &["constants", "--alpha", "-3"],
        &["moser-sweep", "--n-min", "9", "--n-max", "3"],
        &["extremal", "--h", "0", "--c0", "1"],
        &["verify", "--which", "splitting7"],
        &["feasibility", "--sigma-min", "2", "--sigma-max", "1"],
        &["no-such-command"],
    ] {
        assert_eq!(run(args, None).status.code(), Some(2), "{args:?}");
    }
    let o = run(&["constants", "--alpha", "-3"], None);
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
}

#[test]
fn outputs_are_deterministic() {
    let args = ["verify", "--which", "carleson-chang", "--n", "40", "--seed", "3", "--c0", "1"];
    let a = run(&args, None);
    let b = run(&args, None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let sweep = ["moser-sweep", "--a-factor", "1.1", "--n-min", "10", "--n-max", "20"];
    assert_eq!(run(&sweep, None).stdout, run(&sweep, None).stdout);
}

#[test]
fn moser_sweep_columns() {
    let o = run(&["moser-sweep", "--n-min", "1", "--n-max", "12"], None);
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("n,mt_integral,lower_bound,energy,status"));
    for l in lines {
        let cols: Vec<&str> = l.split(',').collect();
        let e: f64 = cols[3].parse().unwrap();
        assert!((e - 1.0).abs() < 1e-6);
        assert_eq!(cols[4], "ok");
    }
    assert!(!s.contains("fitted_log_slope"));
    let s = stdout(&run(&["moser-sweep", "--a-factor", "1.1", "--n-min", "10", "--n-max", "40"], None));
    let slope: f64 = s.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((slope - 0.1).abs() <= 0.005, "{slope}");
}

#[test]
fn out_dir_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["feasibility", "--alpha", "1", "--sigma", "1", "--out", "grid.csv"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert!(csv.contains("1,1,0.961499713538,0.866025403784,1.732050807569,false"));
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("grid.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "feasibility");
    assert_eq!(m["config_digest"].as_str().unwrap().len(), 64);
    assert!(m["outputs"][0].as_str().unwrap().ends_with("grid.csv"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no feasible point"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# defaults\nalpha = 1\nbeta = 0\nc0 = 1\nformat = csv\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let s = stdout(&run(&["--config", cfg, "constants"], None));
    assert!(s.starts_with("key,value") && s.contains("alpha,1.0"));
    let s = stdout(&run(&["--config", cfg, "constants", "--alpha", "2"], None));
    assert!(s.contains("alpha,2.0"), "{s}");
    std::fs::write(dir.path().join("bad.cfg"), "kappa = 1\n").unwrap();
    let o = run(&["--config", dir.path().join("bad.cfg").to_str().unwrap(), "constants", "--alpha", "0"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_divergence_mode_and_dichotomy() {
    let o = run(&["verify", "--which", "boundedness", "--a-factor", "1.2"], None);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["expect_violations"], true);
    let o = run(&["dichotomy", "--seq", "moser", "--n", "5:40"], None);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["verdict"], "concentrating");
    let o = run(&["dichotomy", "--seq", "constant"], None);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["verdict"], "convergent");
}

#[test]
fn extremal_small_kappa_and_profile_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ex.json");
    let o = run(
        &["extremal", "--kappa", "0.1", "--c0", "1", "--starts", "phi0,moser:3", "--out", out.to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["comparison"]["exceeds_ceiling"], false);
    let prof = std::fs::read_to_string(dir.path().join("ex.json.profile.txt")).unwrap();
    assert!(prof.starts_with("# mtweight-profile coord=halfline"));
}
