use std::process::{Command, Output};

fn spps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spps")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn unknown_builtin_exits_with_config_error() {
    let out = spps(&["solve", "--problem", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dirichlet_free"));
}

#[test]
fn malformed_flag_exits_with_config_error() {
    assert_eq!(spps(&["solve", "--problem", "dirichlet_free", "--N", "many"]).status.code(), Some(2));
    assert_eq!(spps(&["solve", "--problem", "dirichlet_free", "--window", "1,2,3"]).status.code(), Some(2));
}

#[test]
fn missing_problem_file_exits_with_config_error() {
    assert_eq!(spps(&["solve", "--problem", "/nonexistent/problem.toml"]).status.code(), Some(2));
}

#[test]
fn solve_prints_csv_with_documented_header() {
    let out = spps(&["solve", "--problem", "dirichlet_free", "--N", "40", "--M", "1000", "--count", "3", "--output", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("index_hint,re,im,residual,center_used_re,center_used_im,outside_theorem_hypotheses")
    );
    for (n, line) in (1..).zip(lines) {
        let re: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((re - (n * n) as f64).abs() < 1e-8, "{line}");
    }
}

#[test]
fn environment_overrides_flags_defaults() {
    let flag = spps(&["solve", "--problem", "dirichlet_free", "--N", "30", "--count", "2"]);
    let env = Command::new(env!("CARGO_BIN_EXE_spps"))
        .args(["solve", "--problem", "dirichlet_free", "--count", "2"])
        .env("SPPS_N", "30")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(0));
    assert_eq!(flag.stdout, env.stdout);
}

#[test]
fn identical_runs_give_identical_json() {
    let args = ["solve", "--problem", "pencil_at33", "--M", "2000", "--count", "3"];
    let (a, b) = (spps(&args), spps(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
}

#[test]
fn table7_is_a_documented_skip() {
    let out = spps(&["bench", "table7"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("SKIPPED"));
}

#[test]
fn powers_dump_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("powers.csv");
    let out = spps(&["powers", "--problem", "dirichlet_free", "--N", "3", "--M", "100", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&path).unwrap().lines().count() > 100);
}
