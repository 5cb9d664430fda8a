use std::fs;
use std::process::{Command, Output};

fn loracap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loracap")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(loracap(&["--help"]).status.code(), Some(0));
    assert_eq!(loracap(&["--version"]).status.code(), Some(0));
}

#[test]
fn sweep_with_both_engines_writes_two_rows() {
    let o = loracap(&["sweep", "--nodes", "5", "--orthogonality", "imperfect", "--trials", "2000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains(",analytic,") && lines[1].ends_with(",,,"));
    assert!(lines[2].contains(",montecarlo,") && lines[2].ends_with(",2000,1"));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.cfg");
    fs::write(&cfg, "# small cell\nradius_m = 1000\nnodes = 7\npolicy = sf-random\northogonality = perfect\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let o = loracap(&["sweep", "--config", cfg, "--engine", "analytic"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("7,sf-random,perfect,analytic,"), "{}", lines[1]);
    let o = loracap(&["sweep", "--config", cfg, "--engine", "analytic", "--nodes", "3,4", "--policy", "sf-distance"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("3,sf-distance,perfect,analytic,"));
}

#[test]
fn config_errors_exit_one_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "nodes = 5\nalpha = steep\n").unwrap();
    let o = loracap(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("alpha"), "{err}");
    assert_eq!(loracap(&["sweep", "--nodes", "5,5"]).status.code(), Some(1));
    assert_eq!(loracap(&["sweep", "--policy", "sf-diagonal"]).status.code(), Some(1));
    assert_eq!(loracap(&["table", "--radius-m", "500"]).status.code(), Some(1));
}

#[test]
fn io_errors_exit_three() {
    let o = loracap(&["sweep", "--nodes", "2", "--engine", "analytic", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(loracap(&["sweep", "--config", "/nonexistent-dir/x.cfg"]).status.code(), Some(3));
    assert_eq!(loracap(&["compare", "--input", "/nonexistent-dir/x.csv"]).status.code(), Some(3));
}

#[test]
fn out_file_matches_stdout_and_compare_reads_it() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let args = ["sweep", "--nodes", "5,10", "--trials", "4000", "--seed", "3"];
    let o = loracap(&[&args[..], &["--out", out.to_str().unwrap(), "--workers", "1"]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let piped = loracap(&[&args[..], &["--workers", "4"]].concat());
    assert_eq!(fs::read(&out).unwrap(), piped.stdout);
    let o = loracap(&["compare", "--input", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("max relative error"), "{text}");
}

#[test]
fn table_and_inspect() {
    let o = loracap(&["table"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 7);
    assert!(text.lines().nth(6).unwrap().starts_with("12,"));
    let o = loracap(&["inspect", "--sf", "8", "--nodes", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 5);
    assert_eq!(loracap(&["inspect", "--sf", "13"]).status.code(), Some(1));
}
