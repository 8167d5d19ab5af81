use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn randbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randbc"))
        .args(args)
        .env_remove("RANDBC_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn text(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn constraint_experiment_writes_curve_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("out");
    let out = randbc(&[
        "constraint-experiment",
        "--set",
        "grid.n=17",
        "--set",
        "bc.K=9",
        "--M",
        "50",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let curve = text(&dir.join("success_curve.csv"));
    let lines: Vec<&str> = curve.lines().collect();
    assert_eq!(lines[0], "N,successes,M,rate,lo95,hi95,tau");
    assert_eq!(lines.len(), 6);
    assert!(lines[5].starts_with("16,"));
    assert!(text(&dir.join("constraint_field.csv")).starts_with("x,y,value,label\n"));

    let manifest: serde_json::Value =
        serde_json::from_str(&text(&dir.join("manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "constraint-experiment");
    assert_eq!(manifest["config"]["grid.n"], "17");
    let outputs = manifest["outputs"].as_object().unwrap();
    assert!(outputs.contains_key("success_curve.csv"));
    assert!(outputs.values().all(|h| h.as_str().unwrap().len() == 64));
}

#[test]
fn replay_reproduces_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let out = randbc(&[
        "runge",
        "--set",
        "grid.n=33",
        "--K",
        "9",
        "--seed",
        "3",
        "--out-dir",
        a.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = a.join("manifest.json");
    let out = randbc(&[
        "replay",
        manifest.to_str().unwrap(),
        "--out-dir",
        b.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read(a.join("runge.csv")).unwrap(),
        fs::read(b.join("runge.csv")).unwrap()
    );
}

#[test]
fn config_file_and_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(
        &cfg,
        "# a comment\ncommand = solve\ngrid.n = 9\nsolve.bc = x\n",
    )
    .unwrap();
    let dir = tmp.path().join("out");
    let out = randbc(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "grid.n=17",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    // header plus 17² nodes
    assert_eq!(text(&dir.join("u.csv")).lines().count(), 1 + 17 * 17);
}

#[test]
fn unknown_key_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = randbc(&[
        "solve",
        "--set",
        "bogus.key=1",
        "--out-dir",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.n"));
}

#[test]
fn type_mismatch_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = randbc(&[
        "solve",
        "--set",
        "grid.n=many",
        "--out-dir",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid.n"));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let dir = blocker.join("out");
    let out = randbc(&[
        "solve",
        "--set",
        "grid.n=9",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn non_elliptic_coefficient_is_a_domain_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = randbc(&[
        "solve",
        "--set",
        "grid.n=9",
        "--set",
        "coeff.a=-1",
        "--out-dir",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(fs::read_dir(tmp.path()).unwrap().next().is_none());
}

#[test]
fn help_exits_zero() {
    let out = randbc(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("constraint-experiment"));
}

#[test]
fn thread_variable_is_validated() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_randbc"))
        .args([
            "solve",
            "--set",
            "grid.n=9",
            "--out-dir",
            tmp.path().to_str().unwrap(),
        ])
        .env("RANDBC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}
