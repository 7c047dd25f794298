use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL_RUN: &str = r#"
[material]
b = 5.0
a = 1.5

[mesh]
n_cells = 40

[time]
dt = 2e-3
t_final = 0.2

[output]
snapshot_interval = 0.1
samples = 64
"#;

fn strainwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strainwave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn simulate_writes_outputs_and_manifest_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, SMALL_RUN).unwrap();
    let first = tmp.path().join("first");
    let out = strainwave(&["simulate", "--quiet", "--config", path_str(&cfg), "--out", path_str(&first)]);
    assert!(out.status.success(), "{}", stderr(&out));

    for name in ["snapshot_t0.000000.csv", "snapshot_t0.100000.csv", "snapshot_t0.200000.csv", "spacetime.csv", "manifest.toml"] {
        assert!(first.join(name).is_file(), "missing {name}");
    }
    let snap = fs::read_to_string(first.join("snapshot_t0.200000.csv")).unwrap();
    assert_eq!(snap.lines().next(), Some("x,sigma,u,v,eps,c"));
    assert_eq!(snap.lines().count(), 1 + 65);
    let spacetime = fs::read_to_string(first.join("spacetime.csv")).unwrap();
    assert_eq!(spacetime.lines().count(), 1 + 3 * 65);
    let manifest = fs::read_to_string(first.join("manifest.toml")).unwrap();
    assert!(manifest.contains("[run]") && manifest.contains("beta_nm"));

    let second = tmp.path().join("second");
    let out = strainwave(&[
        "simulate",
        "--quiet",
        "--config",
        path_str(&first.join("manifest.toml")),
        "--out",
        path_str(&second),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    for name in ["snapshot_t0.200000.csv", "spacetime.csv"] {
        assert_eq!(fs::read(first.join(name)).unwrap(), fs::read(second.join(name)).unwrap(), "{name} differs");
    }
}

#[test]
fn command_line_overrides_material() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, SMALL_RUN).unwrap();
    let dir = tmp.path().join("linear");
    let out = strainwave(&["simulate", "--quiet", "--config", path_str(&cfg), "--b", "0", "--out", path_str(&dir)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest = fs::read_to_string(dir.join("manifest.toml")).unwrap();
    assert!(manifest.contains("b = 0.0"), "{manifest}");
    assert!(manifest.contains("max_newton_iterations = 1"), "{manifest}");
}

#[test]
fn configuration_errors_exit_with_code_2() {
    let out = strainwave(&["simulate", "--quiet"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error[config]"), "{}", stderr(&out));

    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[material]\nb = 1.0\nrho = -2.0\n").unwrap();
    let out = strainwave(&["simulate", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("material.rho"), "{}", stderr(&out));

    fs::write(&cfg, "[material]\nb = 1.0\nstiffness = 3.0\n").unwrap();
    let out = strainwave(&["simulate", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(2));

    let out = strainwave(&["sweep", "--jobs", "0", "--out", path_str(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_files_exit_with_code_4() {
    let tmp = tempfile::tempdir().unwrap();
    let absent = tmp.path().join("absent.toml");
    let out = strainwave(&["simulate", "--config", path_str(&absent)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).starts_with("error[io]"), "{}", stderr(&out));

    let junk = tmp.path().join("junk.csv");
    fs::write(&junk, "1,2\nthree,4\n").unwrap();
    let out = strainwave(&["fit", path_str(&junk), "--out", path_str(tmp.path())]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn newton_failure_exits_with_code_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("stiff.toml");
    let text = SMALL_RUN.replace("[output]", "[newton]\ntol = 1e-15\nk_max = 1\n\n[output]");
    fs::write(&cfg, text).unwrap();
    let out = strainwave(&["simulate", "--quiet", "--config", path_str(&cfg), "--out", path_str(tmp.path())]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).starts_with("error[solver]"), "{}", stderr(&out));
}

#[test]
fn generated_data_is_recovered_by_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data").join("sample.csv");
    let out = strainwave(&[
        "gen-data",
        path_str(&data),
        "--b",
        "2",
        "--a",
        "1.5",
        "--noise",
        "0.005",
        "--seed",
        "7",
        "--quiet",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let again = tmp.path().join("again.csv");
    let out = strainwave(&["gen-data", path_str(&again), "--b", "2", "--a", "1.5", "--noise", "0.005", "--seed", "7"]);
    assert!(out.status.success());
    assert_eq!(fs::read(&data).unwrap(), fs::read(&again).unwrap());

    let out = strainwave(&["fit", path_str(&data), "--out", path_str(tmp.path()), "--quiet"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let fit = fs::read_to_string(tmp.path().join("fit.csv")).unwrap();
    let mut lines = fit.lines();
    assert_eq!(lines.next(), Some("label,b,a,sse,r2,iterations,converged"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "sample");
    let b: f64 = row[1].parse().unwrap();
    let a: f64 = row[2].parse().unwrap();
    assert!((b / 2.0 - 1.0).abs() < 0.05, "b = {b}");
    assert!((a / 1.5 - 1.0).abs() < 0.05, "a = {a}");
    assert_eq!(row[6], "true");
}
