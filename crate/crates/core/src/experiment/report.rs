use std::fmt::Write as _;
use std::str::FromStr;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::nn::ParamSet;

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    /// Mean over repeats, in percent.
    pub accuracy: f64,
    pub repeat_accuracies: Vec<f64>,
    /// Per-repeat, per-epoch mean training loss.
    pub loss_traces: Vec<Vec<f64>>,
    /// Parameters at the end of the last repeat.
    pub final_params: ParamSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub folds: Vec<FoldResult>,
    pub mean: f64,
    /// Sample standard deviation over folds.
    pub std: f64,
    pub seconds: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig, folds: Vec<FoldResult>, seconds: f64) -> Result<Self> {
        if folds.is_empty() {
            return Err(Error::InvalidArgument("report without folds".into()));
        }
        if let Some(f) = folds.iter().find(|f| !(0.0..=100.0).contains(&f.accuracy)) {
            return Err(Error::InvalidArgument(format!(
                "fold {} accuracy {} outside [0, 100]",
                f.fold, f.accuracy
            )));
        }
        let accs: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
        let (mean, std) = mean_std(&accs);
        Ok(Self {
            config,
            folds,
            mean,
            std,
            seconds,
        })
    }

    pub fn accuracies(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.accuracy).collect()
    }

    /// Whether mean and std agree with a recomputation from the folds.
    pub fn is_consistent(&self) -> bool {
        let (mean, std) = mean_std(&self.accuracies());
        (mean - self.mean).abs() <= 1e-12 && (std - self.std).abs() <= 1e-12
    }

    pub fn traces_finite(&self) -> bool {
        self.folds
            .iter()
            .flat_map(|f| f.loss_traces.iter().flatten())
            .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            other => Err(Error::InvalidArgument(format!("unknown format `{other}`"))),
        }
    }
}

pub const CSV_HEADER: &str = "loss,momentum,eta,alpha,epochs,folds,fold,accuracy";

/// One data row per fold for every report, under a single header.
pub fn emit_csv(reports: &[ExperimentReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let c = &r.config;
        for f in &r.folds {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                c.loss, c.momentum, c.eta, c.alpha, c.epochs, c.folds, f.fold, f.accuracy
            )
            .expect("write to String");
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub loss: String,
    pub momentum: bool,
    pub eta: f64,
    pub alpha: f64,
    pub epochs: usize,
    pub folds: usize,
    pub fold: usize,
    pub accuracy: f64,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Format("missing report CSV header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(Error::Format(format!("bad CSV row `{line}`")));
            }
            let bad = |e: &dyn std::fmt::Display| Error::Format(format!("`{line}`: {e}"));
            Ok(CsvRow {
                loss: f[0].to_owned(),
                momentum: f[1].parse().map_err(|e| bad(&e))?,
                eta: f[2].parse().map_err(|e| bad(&e))?,
                alpha: f[3].parse().map_err(|e| bad(&e))?,
                epochs: f[4].parse().map_err(|e| bad(&e))?,
                folds: f[5].parse().map_err(|e| bad(&e))?,
                fold: f[6].parse().map_err(|e| bad(&e))?,
                accuracy: f[7].parse().map_err(|e| bad(&e))?,
            })
        })
        .collect()
}

/// Comparison table, one row per report, followed by the settings used.
pub fn emit_markdown(reports: &[ExperimentReport]) -> String {
    let mut out = String::from("| Loss | avg. accuracy (%) | std |\n|---|---|---|\n");
    for r in reports {
        writeln!(out, "| {} | {:.1} | {:.2} |", r.config.label(), r.mean, r.std).expect("write");
    }
    out.push('\n');
    for r in reports {
        let c = &r.config;
        writeln!(
            out,
            "- {}: eta={}, alpha={}, epochs={}, batch-size={}, folds={}, repeats={}, seed={}, angle-range={}, examples={}, {:.1}s",
            c.label(),
            c.eta,
            if c.momentum { c.alpha } else { 0.0 },
            c.epochs,
            c.batch_size,
            c.folds,
            c.repeats,
            c.seed,
            c.angle_range,
            c.subset.map_or_else(|| "all".to_owned(), |n| n.to_string()),
            r.seconds
        )
        .expect("write");
    }
    out
}
