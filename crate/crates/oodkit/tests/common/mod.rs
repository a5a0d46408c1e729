//! Helpers for driving the `oodkit` binary.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn oodkit() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_oodkit"));
    cmd.env_remove("OODKIT_SEED");
    cmd
}

pub fn run(args: &[&str]) -> Output {
    oodkit().args(args).output().expect("spawn oodkit")
}

/// Runs and asserts exit code 0, returning stdout.
pub fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "oodkit {args:?} failed with {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

/// Artifacts produced by [`pipeline`], relative to its directory.
pub const PIPELINE_ARTIFACTS: &[&str] = &[
    "train_features.fvec",
    "train_labels.csv",
    "test_features.fvec",
    "test_labels.csv",
    "ood_features.fvec",
    "head_w.fvec",
    "head_b.fvec",
    "ema_w.fvec",
    "ema_b.fvec",
    "history.csv",
    "calibration.txt",
    "decisions.csv",
    "logits.fvec",
    "report.txt",
    "confusion.csv",
];

/// synth → train → calibrate → detect → eval into `dir`, using the EMA head.
pub fn pipeline(dir: &Path, seed: u64) -> PathBuf {
    let seed = seed.to_string();
    let d = |n| p(dir, n);
    ok(&["synth", "--classes", "3", "--dim", "8", "--per-class", "100", "--seed", &seed, "--out-dir", &d("")]);
    ok(&["train", "--features", &d("train_features.fvec"), "--labels", &d("train_labels.csv"), "--seed", &seed, "--out-dir", &d("")]);
    let head = ["--head-w", &d("ema_w.fvec"), "--head-b", &d("ema_b.fvec")];
    ok(&[&["calibrate", "--features", &d("train_features.fvec"), "--out", &d("calibration.txt")][..], &head].concat());
    ok(&[
        &["detect", "--features", &d("test_features.fvec"), "--calibration", &d("calibration.txt")][..],
        &head,
        &["--out", &d("decisions.csv"), "--logits-out", &d("logits.fvec")],
    ]
    .concat());
    ok(&[
        &["eval", "--id-features", &d("test_features.fvec"), "--ood-features", &d("ood_features.fvec")][..],
        &head,
        &["--id-labels", &d("test_labels.csv"), "--calibration", &d("calibration.txt")],
        &["--out", &d("report.txt"), "--confusion-out", &d("confusion.csv")],
    ]
    .concat());
    dir.to_path_buf()
}
