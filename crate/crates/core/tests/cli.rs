use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use rstring::cli::{EXIT_FAILED, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
use rstring::io::{read_reports, read_trajectory, DEFAULT_CONFIG};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rstring"))
}

fn config_in(dir: &Path, edit: impl Fn(String) -> String) -> PathBuf {
    let out = dir.join("out");
    let text = DEFAULT_CONFIG.replace("dir = \"output\"", &format!("dir = {:?}", out.display().to_string()));
    let path = dir.join("run.toml");
    fs::write(&path, edit(text)).unwrap();
    path
}

fn status(cmd: &mut Command) -> i32 {
    cmd.output().unwrap().status.code().unwrap()
}

#[test]
fn simulate_then_export_and_contact_stats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), |t| t.replace("t_end = 1.0", "t_end = 0.1"));
    assert_eq!(status(bin().args(["simulate", "-c"]).arg(&cfg)), EXIT_OK);
    let traj = read_trajectory(dir.path().join("out/trajectory.rstr")).unwrap();
    assert_eq!(traj.len(), 11);

    assert_eq!(status(bin().args(["export", "-c"]).arg(&cfg)), EXIT_OK);
    let csv = fs::read_to_string(dir.path().join("out/trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "time,theta,component,value,penalty");
    assert_eq!(lines.count(), traj.len() * 63);

    assert_eq!(status(bin().args(["contact-stats", "--eps", "1.9", "-c"]).arg(&cfg)), EXIT_OK);
    let contacts = fs::read_to_string(dir.path().join("out/contacts.csv")).unwrap();
    assert_eq!(contacts.lines().next().unwrap(), "time,cluster_count,positions");
}

#[test]
fn sample_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), |t| t.replace("count = 500", "count = 20"));
    assert_eq!(status(bin().args(["sample", "-c"]).arg(&cfg)), EXIT_OK);
    let text = fs::read_to_string(dir.path().join("out/samples.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "sample,log_weight,theta,component,value");
    assert_eq!(lines.count(), 20 * 63);
}

#[test]
fn verify_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), |t| t);
    assert_eq!(status(bin().args(["verify", "--tests", "yosida", "-c"]).arg(&cfg)), EXIT_OK);
    let reports = read_reports(dir.path().join("out/reports.jsonl")).unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].test_name, "yosida");
    assert!(reports[0].passed());
    let summary = fs::read_to_string(dir.path().join("out/summary.txt")).unwrap();
    assert!(summary.contains("yosida"));
}

#[test]
fn failing_verification_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), |t| t.replace("slope_tol = 0.05", "slope_tol = 0.0"));
    assert_eq!(status(bin().args(["verify", "--tests", "contraction", "-c"]).arg(&cfg)), EXIT_FAILED);
}

#[test]
fn usage_and_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(status(bin().arg("frobnicate")), EXIT_USAGE);
    assert_eq!(status(bin().args(["verify", "--tests", "nope"])), EXIT_USAGE);
    assert_eq!(status(bin().args(["simulate", "-c"]).arg(dir.path().join("missing.toml"))), EXIT_USAGE);
    let bad = config_in(dir.path(), |t| t.replace("dt = 1e-3", "dt = 1e-2"));
    assert_eq!(status(bin().args(["simulate", "-c"]).arg(&bad)), EXIT_USAGE);
    let typo = config_in(dir.path(), |t| t.replace("[integrator]", "[integrater]"));
    assert_eq!(status(bin().args(["simulate", "-c"]).arg(&typo)), EXIT_USAGE);
}

#[test]
fn runtime_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_in(dir.path(), |t| t);
    let missing = dir.path().join("none.rstr");
    assert_eq!(status(bin().args(["export", "-c"]).arg(&cfg).arg("--input").arg(&missing)), EXIT_RUNTIME);
    let junk = dir.path().join("junk.rstr");
    fs::write(&junk, b"not a trajectory").unwrap();
    assert_eq!(status(bin().args(["contact-stats", "-c"]).arg(&cfg).arg("--input").arg(&junk)), EXIT_RUNTIME);
}

#[test]
fn help_exits_zero_in_process() {
    let args = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    assert_eq!(rstring::cli::main(&args(&["rstring", "--help"])), EXIT_OK);
    assert_eq!(rstring::cli::main(&args(&["rstring"])), EXIT_USAGE);
}
