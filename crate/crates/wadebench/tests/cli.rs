use std::path::Path;
use std::process::{Command, Output};

fn wadebench(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wadebench")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn gen_is_deterministic_and_parseable() {
    let dir = tempfile::tempdir().unwrap();
    let a = wadebench(&["gen", "--task", "1", "--seed", "7", "--count", "1200", "--out", "a.txt"], dir.path());
    let b = wadebench(&["gen", "--task", "1", "--seed", "7", "--count", "1200", "--out", "b.txt"], dir.path());
    assert!(a.status.success() && b.status.success());
    let ta = std::fs::read_to_string(dir.path().join("a.txt")).unwrap();
    assert_eq!(ta, std::fs::read_to_string(dir.path().join("b.txt")).unwrap());
    let ds = wadebench::dataset::read_dataset(&ta, "a.txt").unwrap();
    assert_eq!(ds.samples.len(), 1200);
    assert_eq!(ds.spec.id(), 1);
}

#[test]
fn gen_rejects_unknown_task() {
    let dir = tempfile::tempdir().unwrap();
    let o = wadebench(&["gen", "--task", "11"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("11"));
}

#[test]
fn wade_of_curve_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("hand.csv"), "step,accuracy\n1,0.2\n2,0.5\n3,0.5\n4,0.9\n").unwrap();
    std::fs::write(dir.path().join("perfect.csv"), "step,accuracy\n1,1.0\n").unwrap();
    std::fs::write(dir.path().join("bad.csv"), "step,accuracy\n1,abc\n").unwrap();
    assert_eq!(stdout(&wadebench(&["wade", "hand.csv"], dir.path())).trim(), "0.3");
    assert_eq!(stdout(&wadebench(&["wade", "perfect.csv"], dir.path())).trim(), "1.0");
    let bad = wadebench(&["wade", "bad.csv"], dir.path());
    assert!(!bad.status.success());
    assert!(stderr(&bad).starts_with("error[format]"));
}

#[test]
fn run_with_missing_plan_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = wadebench(&["run", "missing.plan"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error[io]"));
}

#[test]
fn run_flags_override_the_plan_and_report_reads_records() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("small.plan"),
        "# tiny esn run\ntasks = 1\nmodels = esn\nruns = 3\ncount = 60\nesn.size = 50\ncadence = 5\n",
    )
    .unwrap();
    let o = wadebench(&["run", "small.plan", "--runs", "2", "--out", "out"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let records = wadebench::harness::import_records(&dir.path().join("out/records.jsonl")).unwrap();
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|r| r.model == "esn" && r.config["K"] == "50"));
    assert!(dir.path().join("out/curves/task1_esn_run1.csv").exists());

    let r = wadebench(&["report", "out/records.jsonl", "--out", "summary.csv"], dir.path());
    assert!(r.status.success());
    assert!(stdout(&r).lines().any(|l| l.starts_with("task 1")));
    let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("1,esn,2,0,"));
}

#[test]
fn sweep_requires_rules() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!wadebench(&["sweep", "--task", "1"], dir.path()).status.success());
    let o = wadebench(
        &["sweep", "--task", "1", "--rule", "90,30", "--runs", "1", "--count", "40", "--cadence", "10"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("1,30,") && out.contains("1,90,"));
    assert!(stderr(&o).contains("best rule"));
}
