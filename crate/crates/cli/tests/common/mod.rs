//! Shared fixtures for the CLI test targets.

#![allow(dead_code)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use resaudit_core::auditor_data::generate_auditor_rows;
use resaudit_core::data::{AuditFrame, Column, ModelPredictions};
use resaudit_core::numerics::{ols_fit, Matrix};

pub const BIN: &str = env!("CARGO_BIN_EXE_resaudit");

/// Synthetic data with three prediction columns (`lm`, `lm1`, `mean`), the
/// variables `X1..X4` and a binary label `c`.
pub fn fixture_csv(rows: usize, seed: u64) -> String {
    let data = &generate_auditor_rows(seed)[..rows];
    let y: Vec<f64> = data.iter().map(|r| r[0]).collect();
    let full = Matrix::from_fn(rows, 4, |i, j| data[i][j + 1]);
    let x1 = Matrix::from_fn(rows, 1, |i, _| data[i][1]);
    let lm = ols_fit(&full, &y).unwrap().fitted;
    let lm1 = ols_fit(&x1, &y).unwrap().fitted;
    let mean = vec![y.iter().sum::<f64>() / rows as f64; rows];
    let mut sorted = y.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[rows / 2];
    let mut variables: Vec<(String, Column)> = (1..5)
        .map(|j| {
            (
                format!("X{j}"),
                Column::Numeric(data.iter().map(|r| r[j]).collect()),
            )
        })
        .collect();
    variables.push((
        "c".into(),
        Column::Numeric(y.iter().map(|v| f64::from(u8::from(*v > median))).collect()),
    ));
    let models = vec![
        ModelPredictions {
            label: "lm".into(),
            y_hat: lm,
        },
        ModelPredictions {
            label: "lm1".into(),
            y_hat: lm1,
        },
        ModelPredictions {
            label: "mean".into(),
            y_hat: mean,
        },
    ];
    let frame = AuditFrame::new(y, models, variables).unwrap();
    resaudit_cli::ingest::frame_to_csv(&frame, "y").unwrap()
}

pub fn write_fixture(dir: &Path, rows: usize, seed: u64) -> PathBuf {
    let path = dir.join("data.csv");
    std::fs::write(&path, fixture_csv(rows, seed)).unwrap();
    path
}

pub fn run(args: &[&str]) -> Output {
    run_with_stdin(args, None)
}

pub fn run_with_stdin(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .env_remove("RESAUDIT_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn resaudit");
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(text) = stdin {
            pipe.write_all(text.as_bytes()).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

/// Stdout with every JSON line's timestamp zeroed.
pub fn canonical_stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(resaudit_cli::document::strip_timestamp)
        .collect::<Vec<_>>()
        .join("\n")
}

/// Adapter command line serving built-in OLS through this binary.
pub fn ols_adapter_command() -> String {
    format!("{BIN} serve-adapter --model ols --name ols-adapter")
}
