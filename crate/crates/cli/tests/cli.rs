use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn flowtm(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowtm"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("FLOWTM_MACHINE")
        .env_remove("FLOWTM_CONFIG")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_instant_agrees() {
    let d = tempfile::tempdir().unwrap();
    let o = flowtm(&["verify", "--machine", "instant", "--inputs", "3"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(d.path().join("verify.csv")).unwrap();
    let rows: Vec<_> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
    assert!(d.path().join("manifest.txt").exists());
}

#[test]
fn verify_bounded_bounce_agrees() {
    let d = tempfile::tempdir().unwrap();
    let o = flowtm(&["verify", "--machine", "bounce", "--inputs", "2", "--bounds", "-2:3"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("bounded,LOOP,LOOP,true"));
}

#[test]
fn looping_machine_is_unresolved() {
    let d = tempfile::tempdir().unwrap();
    let args = ["simulate", "--machine", "loop", "--inputs", "1", "--lmax", "6", "--window", "6"];
    let o = flowtm(&args, d.path());
    assert_eq!(o.status.code(), Some(0));
    let v = fs::read_to_string(d.path().join("verdicts.txt")).unwrap();
    assert!(v.starts_with("0 UNRESOLVED"), "{v}");
    let mut strict = args.to_vec();
    strict.push("--fail-on-unresolved");
    assert_eq!(flowtm(&strict, d.path()).status.code(), Some(1));
}

#[test]
fn estimate_prints_nested_logs() {
    let d = tempfile::tempdir().unwrap();
    let o = flowtm(&["estimate", "--sb", "5", "--C", "1"], d.path());
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("ln ln ln H1 = 5\n"), "{s}");
    assert!(s.contains("* 10^64"), "{s}");
}

#[test]
fn usage_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(flowtm(&["simulate", "--bogus"], d.path()).status.code(), Some(2));
    assert_eq!(flowtm(&["simulate", "--machine", "nonesuch"], d.path()).status.code(), Some(2));
    assert_eq!(flowtm(&["simulate", "--target", "12"], d.path()).status.code(), Some(2));
}

#[test]
fn malformed_machine_reports_line() {
    let d = tempfile::tempdir().unwrap();
    let m = d.path().join("bad.tm");
    fs::write(&m, "machine bad\nstates 2\nstart 1\nhalt 2\nrule 1 0 -> 2 0 sideways\n").unwrap();
    let o = flowtm(&["compile", "--machine", m.to_str().unwrap()], &d.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 5"), "{err}");
}

#[test]
fn runs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["perturb", "--machine", "countdown", "--inputs", "2", "--trials", "2", "--seed", "7"];
    assert_eq!(flowtm(&args, a.path()).status.code(), Some(0));
    assert_eq!(flowtm(&args, b.path()).status.code(), Some(0));
    let sim = ["simulate", "--machine", "countdown", "--inputs", "2"];
    flowtm(&sim, &a.path().join("sim"));
    flowtm(&sim, &b.path().join("sim"));
    for f in ["robustness.csv", "manifest.txt", "sim/trajectory_1.csv", "sim/events_1.csv", "sim/plot_1.svg"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn settings_precedence() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    fs::write(&cfg, "machine = loop\ninputs = 4\nlmax = 5\nwindow = 5\n").unwrap();
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_flowtm"));
        c.args(["simulate", "--config", cfg.to_str().unwrap(), "--out"]).arg(d.path().join("o")).args(extra);
        c.env_remove("FLOWTM_MACHINE").env_remove("FLOWTM_INPUTS");
        if let Some(v) = env {
            c.env("FLOWTM_INPUTS", v);
        }
        let o = c.output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o).lines().count()
    };
    assert_eq!(run(None, &[]), 4);
    assert_eq!(run(Some("2"), &[]), 2);
    assert_eq!(run(Some("2"), &["--inputs", "3"]), 3);
}

#[test]
fn extend3d_series_residuals() {
    let d = tempfile::tempdir().unwrap();
    let o = flowtm(&["extend3d", "--datum", "xy", "--order", "8", "--grid", "3"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = fs::read_to_string(d.path().join("residuals.txt")).unwrap();
    assert!(r.contains("ok true"));
    let grid = fs::read_to_string(d.path().join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 27);
}
