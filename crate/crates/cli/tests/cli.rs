use std::path::PathBuf;
use std::process::{Command, Output};

use glnn::experiment::parse_csv;
use glnn::nn::checkpoint;

fn glnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glnn"))
        .args(args)
        .output()
        .expect("spawn glnn")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn small_run<'a>(images: &'a str, labels: &'a str) -> Vec<&'a str> {
    vec![
        "--images", images, "--labels", labels, "--subset", "200", "--folds", "2", "--epochs", "1",
        "--batch-size", "50",
    ]
}

#[test]
fn losscheck_writes_the_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let status = glnn(&["losscheck", "--points", "101", "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    let mut reader = csv::Reader::from_path(&out).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec!["d", "info_loss", "sigmoid_loss", "loss", "dloss_dy"]
    );
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 101);
    let mid = &rows[50];
    assert!((mid[0] - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    assert!((mid[3] - 0.25).abs() < 1e-12);
    assert!(mid[4].abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(glnn(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(glnn(&["train", "--folds", "1"]).status.code(), Some(1));
    assert_eq!(glnn(&["train", "--angle-range", "60"]).status.code(), Some(1));
    assert_eq!(glnn(&["gradcheck", "--scale", "huge"]).status.code(), Some(1));
    assert_eq!(glnn(&["losscheck", "--points", "1"]).status.code(), Some(1));
    let missing = glnn(&["train", "--images", "/nonexistent/i.gz", "--labels", "/nonexistent/l.gz"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/i.gz"));
    assert_eq!(glnn(&["--help"]).status.code(), Some(0));
}

#[test]
fn train_emits_csv_and_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let (images, labels) = (data("digits-images-idx3-ubyte.gz"), data("digits-labels-idx1-ubyte.gz"));
    let ckpt = dir.path().join("ckpt");
    let mut args = vec!["train", "--checkpoint-dir", ckpt.to_str().unwrap()];
    args.extend(small_run(&images, &labels));
    let out = glnn(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.loss == "proposed" && r.epochs == 1));
    for fold in 0..2 {
        let params = checkpoint::load(ckpt.join(format!("fold{fold}.glnn"))).unwrap();
        assert!(params.get("conv0.weight").is_some());
        assert!(params.is_finite());
    }
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small SSE run\nloss = sse\nmomentum = false\neta = 0.05\n").unwrap();
    let (images, labels) = (data("digits-images-idx3-ubyte.gz"), data("digits-labels-idx1-ubyte.gz"));
    let mut args = vec!["train", "--config", cfg.to_str().unwrap(), "--alpha", "0"];
    args.extend(small_run(&images, &labels));
    let out = glnn(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r.loss == "sse" && !r.momentum && r.eta == 0.05));

    std::fs::write(&cfg, "batch_size = lots\n").unwrap();
    assert_eq!(glnn(&["train", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn table1_markdown_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("digits.glds");
    let out_md = dir.path().join("table.md");
    let (images, labels) = (data("digits-images-idx3-ubyte.gz"), data("digits-labels-idx1-ubyte.gz"));
    let mut args = vec!["table1", "--cache", cache.to_str().unwrap(), "--out", out_md.to_str().unwrap()];
    args.extend(small_run(&images, &labels));
    assert!(glnn(&args).status.success());
    assert!(cache.exists());
    let first = std::fs::read_to_string(&out_md).unwrap();
    assert_eq!(first.lines().filter(|l| l.starts_with("| ") && l.contains("momentum")).count(), 3);

    // Second run reads the cache and reproduces the table apart from timings.
    assert!(glnn(&args).status.success());
    let second = std::fs::read_to_string(&out_md).unwrap();
    let table = |s: &str| s.lines().take(5).map(str::to_owned).collect::<Vec<_>>();
    assert_eq!(table(&first), table(&second));
}
