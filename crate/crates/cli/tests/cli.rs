use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sachem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sachem")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"
seed = 3
steps = 6
population = { m13 = 12, m7 = 12, m3 = 12 }
snapshot = { cadence = 3 }

[metrics]
sample_size = 12
"#;

#[test]
fn validate_default_network() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 1\nsteps = 1\n");
    let o = sachem(&["network", "validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "OK (4 rules)");
}

#[test]
fn validate_reports_bad_rule() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
seed = 1
steps = 1
[[network]]
id = "R1"
substrate = "m13"
catalyst = "m13"
product = "m7"
direction = "encode"
k = 13
p = 2
s = 1
"#,
    );
    let o = sachem(&["network", "validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("R1"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(sachem(&["run"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 1\nsteps = 1\nbogus = 2\n");
    let o = sachem(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn missing_snapshot_is_runtime_error() {
    let o = sachem(&["analyze", "reconstruct", "--snapshot", "/nonexistent/s.saec", "--pathway", "7-3-7"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_resume_and_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();

    let o = sachem(&["run", "--config", &cfg, "--out", out_s, "--workers", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let last = stdout(&o).trim().to_string();
    assert!(last.ends_with("step_00000006.saec"));

    let snap3 = out.join("snapshots/step_00000003.saec");
    let o = sachem(&["resume", "--snapshot", snap3.to_str().unwrap(), "--steps", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("snapshots/step_00000009.saec").exists());
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    let rows = metrics.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 1 + 10);

    let o = sachem(&["analyze", "reconstruct", "--snapshot", &last, "--pathway", "13-7-13"]);
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o);
    assert!(line.starts_with("pathway=13-7-13 step=6 sample=12 re="), "{line}");
    assert!(line.trim_end().ends_with("catalyst_seed=3"));

    let o = sachem(&["analyze", "reconstruct", "--snapshot", &last, "--pathway", "nope"]);
    assert_eq!(o.status.code(), Some(1));

    let table = dir.path().join("pca.csv");
    let o = sachem(&[
        "analyze", "pca", "--snapshot", &last, "--kind", "m7", "--dims", "2", "--out",
        table.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(table).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# explained_variance,"));
    assert_eq!(lines.next(), Some("pc1,pc2"));
    assert_eq!(lines.count(), 12);
}

#[test]
fn oracle_pool_lists_every_pair() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 2\nsteps = 1\npopulation = { m13 = 2, m7 = 3, m3 = 2 }\n");
    let o = sachem(&["oracle", "pool", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("target,rule,substrate,catalyst,product"));
    // m13: R3 over 3*2 ordered M7 pairs; m7: R1 2*1 + R4 2*1; m3: R2 3*2.
    assert_eq!(lines.count(), 6 + 4 + 6);

    let big = write_config(dir.path(), "seed = 2\nsteps = 1\npopulation = { m13 = 100, m7 = 3, m3 = 2 }\n");
    assert_eq!(sachem(&["oracle", "pool", "--config", &big]).status.code(), Some(1));
}
