use std::path::Path;
use std::process::{Command, Output};

fn rda(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rda"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("rda runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn synth_shape_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = rda(dir.path(), &["synth", "--dim", "64", "--classes", "5", "--per-class", "100", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let line: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(line["dim"], 64);
    assert_eq!(line["samples"], 500);
    assert_eq!(line["classes"], 5);
    let text = std::fs::read_to_string(dir.path().join("synth.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 500);
    assert!(rows.iter().all(|r| r.split(',').count() == 65));
}

#[test]
fn synth_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |name| ["synth", "--dim", "8", "--classes", "3", "--per-class", "10", "--seed", "7", "--out", name];
    assert!(rda(dir.path(), &args("a.csv")).status.success());
    assert!(rda(dir.path(), &args("b.csv")).status.success());
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn synth_single_class_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = rda(dir.path(), &["synth", "--dim", "4", "--classes", "1", "--per-class", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_dataset_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = rda(dir.path(), &["fit-eval", "--data", "no-such-file.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no-such-file.csv"), "{}", stderr(&out));

    let out = rda(dir.path(), &["fit-eval", "--idx-images", "img.idx", "--idx-labels", "lab.idx"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("img.idx"));
}

#[test]
fn bad_flags_and_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(rda(dir.path(), &["fit-eval", "--solver", "newton"]).status.code(), Some(2));
    assert_eq!(rda(dir.path(), &["fit-eval"]).status.code(), Some(2));
    assert_eq!(rda(dir.path(), &["check", "--suite", "bogus"]).status.code(), Some(2));
    assert!(rda(dir.path(), &["synth", "--dim", "6", "--classes", "2", "--per-class", "6"]).status.success());
    // d > D
    let out = rda(dir.path(), &["fit-eval", "--data", "synth.csv", "--dim", "7", "--repeats", "1"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    // sparsity on a Grassmann manifold
    let out = rda(dir.path(), &["fit-eval", "--data", "synth.csv", "--manifold", "grassmann", "--lambda", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::write(dir.path().join("ragged.csv"), "1,2,0\n3,1\n").unwrap();
    let out = rda(dir.path(), &["fit-eval", "--data", "ragged.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("ragged.csv"));
}

#[test]
fn fit_eval_writes_reports_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(rda(d, &["synth", "--dim", "10", "--classes", "3", "--per-class", "20", "--seed", "2"]).status.success());
    let run = ["fit-eval", "--data", "synth.csv", "--dim", "2", "--repeats", "2", "--folds", "3", "--kmeans-restarts", "3"];
    let out = rda(d, &[&run[..], &["--out", "a", "--plot"]].concat());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for f in ["report.json", "report.csv", "trace_0.csv", "trace_1.csv", "cost_curve.svg"] {
        assert!(d.join("a").join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(d.join("a/report.csv")).unwrap();
    assert!(csv.starts_with("repeat,acc,nmi,knn\n"));
    assert_eq!(csv.lines().count(), 3);
    let trace = std::fs::read_to_string(d.join("a/trace_0.csv")).unwrap();
    assert!(trace.starts_with("iteration,cost,grad_norm\n"));

    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("a/report.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["config"]["experiment"]["seed"], 0);
    assert_eq!(report["inputs"][0]["git_blob_sha1"].as_str().unwrap().len(), 40);
    assert!(report.get("wall_time").is_none());

    let out = rda(d, &["fit-eval", "--replay", "a/report.json", "--out", "b"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    // Changing the input behind a report is a replay mismatch.
    assert!(rda(d, &["synth", "--dim", "10", "--classes", "3", "--per-class", "20", "--seed", "3"]).status.success());
    let out = rda(d, &["fit-eval", "--replay", "a/report.json", "--out", "c"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("/inputs/0/git_blob_sha1"), "{}", stderr(&out));
}

#[test]
fn jobs_do_not_change_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(rda(d, &["synth", "--dim", "8", "--classes", "3", "--per-class", "15"]).status.success());
    let run = ["fit-eval", "--data", "synth.csv", "--solver", "cg", "--repeats", "3", "--folds", "3"];
    assert!(rda(d, &[&run[..], &["--out", "one"]].concat()).status.success());
    assert!(rda(d, &[&run[..], &["--out", "three", "--jobs", "3"]].concat()).status.success());
    let one = std::fs::read(d.join("one/report.json")).unwrap();
    let three = std::fs::read(d.join("three/report.json")).unwrap();
    assert_eq!(one, three);
}

#[test]
fn lambda_sweep_writes_one_directory_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(rda(d, &["synth", "--dim", "8", "--classes", "3", "--per-class", "15"]).status.success());
    let out = rda(
        d,
        &["fit-eval", "--data", "synth.csv", "--repeats", "1", "--folds", "3", "--lambda-sweep", "0,0.01", "--out", "sw"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(d.join("sw/lambda_0/report.json").exists());
    assert!(d.join("sw/lambda_0.01/report.json").exists());
    let sweep = std::fs::read_to_string(d.join("sw/sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 3);
    assert!(sweep.starts_with("lambda,"));
}

#[test]
fn baselines_run_without_traces() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(rda(d, &["synth", "--dim", "8", "--classes", "3", "--per-class", "15"]).status.success());
    for solver in ["lda", "raw"] {
        let out = rda(d, &["fit-eval", "--data", "synth.csv", "--solver", solver, "--repeats", "1", "--folds", "3", "--out", solver]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert!(!d.join(solver).join("trace_0.csv").exists());
        let report: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join(solver).join("report.json")).unwrap()).unwrap();
        assert_eq!(report["config"]["experiment"]["lambda"], 0.0);
    }
}

#[test]
fn check_filters_to_one_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = rda(dir.path(), &["check", "--suite", "kyfan", "--seeds", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.starts_with("kyfan")));
}

#[test]
fn check_runs_every_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = rda(dir.path(), &["check", "--seeds", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = String::from_utf8(out.stdout).unwrap();
    for suite in ["projection", "retraction", "scatter", "gradient", "hessian", "kyfan"] {
        assert!(table.lines().any(|l| l.starts_with(suite)), "{suite}");
    }
}
