use std::path::PathBuf;
use std::process::Command;

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/problems")
}

fn plangeo() -> Command {
    Command::new(env!("CARGO_BIN_EXE_plangeo"))
}

#[test]
fn check_replays_a_problem() {
    let out = plangeo().arg("check").arg(corpus().join("01_angle_sum.json")).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn solve_prints_a_solved_row() {
    let out = plangeo()
        .args(["solve", "--method", "bw", "--strategy", "bfs", "--timeout", "20"])
        .arg(corpus().join("02_segment_sum.json"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"solved\""));
}

#[test]
fn batch_writes_three_report_files() {
    let problems = tempfile::tempdir().unwrap();
    for name in ["01_angle_sum.json", "06_midpoint.json"] {
        std::fs::copy(corpus().join(name), problems.path().join(name)).unwrap();
    }
    let out_dir = tempfile::tempdir().unwrap();
    let prefix = out_dir.path().join("run");
    let out = plangeo().arg("batch").arg(problems.path()).arg("--out").arg(&prefix).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for suffix in ["run.json", "run_summary.csv", "run_problems.csv"] {
        assert!(out_dir.path().join(suffix).exists(), "missing {suffix}");
    }
}

#[test]
fn rejects_zero_beam() {
    let out = plangeo().args(["solve", "--beam", "0"]).arg(corpus().join("01_angle_sum.json")).output().unwrap();
    assert!(!out.status.success());
}
