//! The `floodnet` binary: exit codes and written files.

use std::path::Path;
use std::process::{Command, Output};

fn floodnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_floodnet"))
        .args(args)
        .output()
        .expect("spawn floodnet")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&floodnet(&["--help"])), 0);
    assert_eq!(code(&floodnet(&["--version"])), 0);
    assert_eq!(code(&floodnet(&["fit", "--help"])), 0);
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());
    assert_eq!(code(&floodnet(&[])), 1, "missing subcommand");
    assert_eq!(code(&floodnet(&["frobnicate"])), 1);
    assert_eq!(code(&floodnet(&["fit", "--kind", "lstm"])), 1);
    assert_eq!(code(&floodnet(&["fit", "--gain-constraint", "loose"])), 1);
    assert_eq!(code(&floodnet(&["fit", "--out", out])), 1, "missing --data");
    assert_eq!(code(&floodnet(&["generate", "--preset", "bogus", "--out", out])), 1);
    assert_eq!(code(&floodnet(&["predict", "--out", out])), 1, "missing --model");

    assert_eq!(code(&floodnet(&["generate", "--out", out])), 0);
    let csv = dir.path().join("streak.csv");
    for bad in [
        vec!["fit", "--split", "0"],
        vec!["fit", "--split", "1.5"],
        vec!["fit", "--split", "500"],
        vec!["fit", "--starts", "0"],
        vec!["fit", "--kind", "rnn", "--epochs", "0"],
        vec!["compare", "--window", "95"],
        vec!["bench", "--repeats", "0"],
    ] {
        let mut args = bad.clone();
        args.extend(["--data", path(&csv), "--out", out]);
        assert_eq!(code(&floodnet(&args)), 1, "{bad:?}");
    }
    let fit = floodnet(&["fit", "--data", path(&csv), "--out", out, "--starts", "1"]);
    assert_eq!(code(&fit), 0);
    let model = dir.path().join("crmp_model.json");
    let empty = floodnet(&[
        "predict",
        "--model",
        path(&model),
        "--data",
        path(&csv),
        "--range",
        "7:7",
        "--out",
        out,
    ]);
    assert_eq!(code(&empty), 1);
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());
    let missing = floodnet(&["fit", "--data", "/definitely/not/here.csv", "--out", out]);
    assert_eq!(code(&missing), 2);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/definitely/not/here.csv"));

    let cases = [
        ("ragged.csv", "time,INJ:I1,PRD:P1\n0,1,1\n1,2\n"),
        ("text.csv", "time,INJ:I1,PRD:P1\n0,1,1\n1,abc,2\n"),
        ("backwards.csv", "time,INJ:I1,PRD:P1\n0,1,1\n2,1,1\n1,1,1\n"),
        ("noprod.csv", "time,INJ:I1\n0,1\n1,2\n2,3\n"),
        ("header.csv", "time,I1,PRD:P1\n0,1,1\n1,1,1\n"),
        ("empty.csv", ""),
    ];
    for (name, text) in cases {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        let o = floodnet(&["fit", "--data", path(&p), "--out", out, "--split", "1"]);
        assert_eq!(code(&o), 2, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }

    // a model fitted for other wells, and a model file from the future
    assert_eq!(code(&floodnet(&["generate", "--out", out])), 0);
    let csv = dir.path().join("streak.csv");
    assert_eq!(
        code(&floodnet(&["fit", "--data", path(&csv), "--out", out, "--starts", "1"])),
        0
    );
    let model = dir.path().join("crmp_model.json");
    let other = dir.path().join("other.csv");
    std::fs::write(&other, "time,INJ:X,PRD:Y\n0,1,1\n1,1,1\n").unwrap();
    assert_eq!(
        code(&floodnet(&[
            "predict",
            "--model",
            path(&model),
            "--data",
            path(&other),
            "--out",
            out
        ])),
        2
    );
    let text = std::fs::read_to_string(&model)
        .unwrap()
        .replace("\"format_version\": 1", "\"format_version\": 99");
    let future = dir.path().join("future.json");
    std::fs::write(&future, text).unwrap();
    let o = floodnet(&["predict", "--model", path(&future), "--data", path(&csv), "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("version 99"));
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("huge.csv");
    std::fs::write(
        &data,
        "time,INJ:I1,PRD:P1\n0,1e300,1e300\n1,1e300,1e308\n2,1e308,1e300\n3,1e300,1e308\n4,1e308,1e300\n",
    )
    .unwrap();
    let o = floodnet(&[
        "fit",
        "--data",
        path(&data),
        "--out",
        path(dir.path()),
        "--split",
        "3",
        "--starts",
        "2",
    ]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn pipeline_writes_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        code(&floodnet(&["generate", "--preset", "streak", "--out", path(d)])),
        0
    );
    let csv = d.join("streak.csv");
    assert!(d.join("streak.spec.json").exists());

    let custom = d.join("custom/model.json");
    std::fs::create_dir_all(custom.parent().unwrap()).unwrap();
    let fit = floodnet(&[
        "fit",
        "--data",
        path(&csv),
        "--kind",
        "rnn",
        "--epochs",
        "50",
        "--model",
        path(&custom),
        "--out",
        path(d),
    ]);
    assert_eq!(code(&fit), 0);
    assert!(custom.exists() && d.join("rnn_fit_report.json").exists());

    let pred = floodnet(&[
        "predict",
        "--model",
        path(&custom),
        "--data",
        path(&csv),
        "--range",
        "90:",
        "--out",
        path(d),
    ]);
    assert_eq!(code(&pred), 0);
    let text = std::fs::read_to_string(d.join("predictions.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "step,time,PRD:P1,PRD:P2,PRD:P3,PRD:P4");
    assert_eq!(lines.count(), 30);
    assert!(text.lines().nth(1).unwrap().starts_with("90,90,"));

    let cmp = floodnet(&[
        "compare",
        "--data",
        path(&csv),
        "--starts",
        "2",
        "--epochs",
        "50",
        "--out",
        path(d),
    ]);
    assert_eq!(code(&cmp), 0);
    assert!(String::from_utf8_lossy(&cmp.stdout).contains("RNN test"));
    let tidy = std::fs::read_to_string(d.join("comparison.csv")).unwrap();
    assert_eq!(tidy.lines().count(), 1 + 120 * 4);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("comparison.json")).unwrap()).unwrap();
    assert_eq!(report["meta"]["split_index"], 90);

    let crmt = floodnet(&[
        "fit",
        "--data",
        path(&csv),
        "--kind",
        "crmt",
        "--gain-constraint",
        "ineq",
        "--out",
        path(d),
    ]);
    assert_eq!(code(&crmt), 0);
    let pred = floodnet(&[
        "predict",
        "--model",
        path(&d.join("crmt_model.json")),
        "--data",
        path(&csv),
        "--out",
        path(d),
    ]);
    assert_eq!(code(&pred), 0);
    let text = std::fs::read_to_string(d.join("predictions.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "step,time,PRD:TOTAL");
    assert_eq!(text.lines().count(), 121);
}
