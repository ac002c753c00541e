use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ccl(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccl"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("CCL_OUT_DIR")
        .output()
        .expect("ccl runs")
}

fn summary_value(dir: &Path, pipeline: &str, check: &str) -> f64 {
    let text = fs::read_to_string(dir.join(format!("{pipeline}_summary.csv"))).unwrap();
    let line = text.lines().find(|l| l.starts_with(&format!("{check},"))).unwrap();
    line.split(',').nth(1).unwrap().parse().unwrap()
}

#[test]
fn canonical_decompose_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = ccl(&["decompose"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(summary_value(dir.path(), "decompose", "reconstruction_error") <= 1e-6);
    for f in ["f1", "f2", "psi", "eta"] {
        assert!(dir.path().join(format!("decompose_{f}.cclf")).exists());
    }
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "seed = [unterminated\n").unwrap();
    let out = ccl(&["cone", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));

    fs::write(&cfg, "[gap]\nno_such_key = 1\n").unwrap();
    let out = ccl(&["cone", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = ccl(&["cone", "--config", "/nonexistent/scenario.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unequal_gap_parameters_required() {
    let dir = tempfile::tempdir().unwrap();
    let out = ccl(&["verify-profiles", "--set", "gap.a_prime=1.0"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = ccl(&["decompose", "--set", "decompose.tolerance=1e-20"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL decompose: reconstruction_error"));
}

#[test]
fn identical_seed_gives_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = ccl(&["psh", "--seed", "7"], d.path());
        assert_eq!(out.status.code(), Some(0));
        let out = ccl(&["cone", "--seed", "7"], d.path());
        assert_eq!(out.status.code(), Some(0));
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 5);
    for n in names {
        let x = fs::read(a.path().join(&n)).unwrap();
        let y = fs::read(b.path().join(&n)).unwrap();
        assert_eq!(x, y, "{n:?} differs");
    }
    let header = fs::read_to_string(a.path().join("psh_bounds.csv")).unwrap();
    assert!(header.starts_with("# ccl pipeline=psh scenario=canonical seed=7\nabs_x,lower_gap,upper_gap\n"));
}

#[test]
fn density_series_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = ccl(&["density"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("density_series.csv")).unwrap();
    let mut lines = text.lines().skip(1);
    assert_eq!(lines.next(), Some("n,error,tail,psi_norm"));
    let ns: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ns, vec![2.0, 4.0, 8.0]);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ccl")).arg("cone").env("CCL_OUT_DIR", dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("cone_summary.csv").exists());
}

#[test]
fn scenario_pipeline_runs_without_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    fs::write(&cfg, "name = \"geometry\"\npipeline = \"cone-geometry\"\n").unwrap();
    let out = ccl(&["--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("cone_summary.csv")).unwrap();
    assert!(text.starts_with("# ccl pipeline=cone scenario=geometry"));

    let out = ccl(&[], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
