//! `glnn`: constants, loss sweeps, gradient checks and cross-validated
//! training runs for the golden-ratio loss.
//!
//! Exit status is 0 on success, 1 when validation fails (bad arguments or
//! configuration, a failing gradient check) and 2 on runtime errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use glnn::data::{self, LabeledImage};
use glnn::experiment::{
    self, Canonical, ExperimentConfig, ExperimentReport, GradcheckOptions, ReportFormat, Scale,
};
use glnn::golden::{golden_roots, GoldenConstants};
use glnn::nn::checkpoint;
use glnn::Error;

#[derive(Debug, Parser)]
#[command(name = "glnn", version, about = "Golden-ratio loss toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print p1, p2, the momentum weight and the learning rate.
    Constants,
    /// Write a CSV sweep of the loss family over d ∈ [ε, π/2 − ε].
    Losscheck {
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-difference checks of every analytic gradient.
    Gradcheck {
        #[arg(long, default_value = "tiny")]
        scale: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Negative control: corrupt the conv backward pass.
        #[arg(long, hide = true)]
        corrupt_conv: bool,
    },
    /// Cross-validate a single configuration.
    Train {
        #[command(flatten)]
        run: RunArgs,
        /// Directory to write each fold's final parameters into.
        #[arg(long)]
        checkpoint_dir: Option<PathBuf>,
    },
    /// Run the three canonical configurations and emit the comparison table.
    Table1 {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// key=value file applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    momentum: Option<bool>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    images: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    angle_range: Option<f64>,
    /// Use a seeded subset of this many examples.
    #[arg(long)]
    subset: Option<usize>,
    /// Augmented-dataset cache: read if present, written otherwise.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file_contents(&fs::read_to_string(path)?)?;
        }
        let set = |cfg: &mut ExperimentConfig, key: &str, v: Option<String>| match v {
            Some(v) => cfg.set(key, &v),
            None => Ok(()),
        };
        set(&mut cfg, "loss", self.loss.clone())?;
        set(&mut cfg, "momentum", self.momentum.map(|v| v.to_string()))?;
        set(&mut cfg, "eta", self.eta.map(|v| v.to_string()))?;
        set(&mut cfg, "alpha", self.alpha.map(|v| v.to_string()))?;
        set(&mut cfg, "epochs", self.epochs.map(|v| v.to_string()))?;
        set(&mut cfg, "batch-size", self.batch_size.map(|v| v.to_string()))?;
        set(&mut cfg, "folds", self.folds.map(|v| v.to_string()))?;
        set(&mut cfg, "repeats", self.repeats.map(|v| v.to_string()))?;
        set(&mut cfg, "seed", self.seed.map(|v| v.to_string()))?;
        set(&mut cfg, "angle-range", self.angle_range.map(|v| v.to_string()))?;
        set(&mut cfg, "subset", self.subset.map(|v| v.to_string()))?;
        if let Some(p) = &self.images {
            cfg.images = p.clone();
        }
        if let Some(p) = &self.labels {
            cfg.labels = p.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn format(&self, default: ReportFormat) -> Result<ReportFormat, Error> {
        self.format.as_deref().map_or(Ok(default), str::parse)
    }
}

/// Errors that map to exit status 1.
#[derive(Debug)]
struct ValidationFailure(String);

impl std::fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ValidationFailure {}

fn is_validation(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.is::<ValidationFailure>()
            || matches!(
                e.downcast_ref::<Error>(),
                Some(Error::InvalidArgument(_) | Error::Domain { .. } | Error::Network(_))
            )
    })
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn constants() {
    let g = GoldenConstants::new();
    let (p1, p2) = golden_roots();
    println!("p1    = {p1:.16}");
    println!("p2    = {p2:.16}");
    println!("alpha = {:.16}", g.alpha);
    println!("eta   = {:.16}", g.eta);
    println!("alpha/sqrt(2) - p1 = {:e}", g.alpha / std::f64::consts::SQRT_2 - g.p1);
    println!("eta - (1 - alpha)^2 = {:e}", g.eta - (1.0 - g.alpha).powi(2));
}

fn load_examples(cfg: &ExperimentConfig, cache: Option<&Path>) -> Result<Vec<LabeledImage>> {
    if let Some(path) = cache.filter(|p| p.exists()) {
        log::info!("reading dataset cache {}", path.display());
        return data::cache::load(path).with_context(|| format!("reading {}", path.display()));
    }
    let examples = experiment::prepare_dataset(cfg).with_context(|| {
        format!(
            "loading {} / {}",
            cfg.images.display(),
            cfg.labels.display()
        )
    })?;
    if let Some(path) = cache {
        data::cache::save(path, &examples)?;
    }
    Ok(examples)
}

fn emit(reports: &[ExperimentReport], format: ReportFormat, out: Option<&Path>) -> Result<()> {
    for r in reports {
        if !r.is_consistent() || !r.traces_finite() {
            return Err(ValidationFailure(format!("inconsistent report for {}", r.config.label())).into());
        }
    }
    let text = match format {
        ReportFormat::Csv => experiment::emit_csv(reports),
        ReportFormat::Markdown => experiment::emit_markdown(reports),
    };
    write_output(out, &text)
}

fn summarize(r: &ExperimentReport) {
    eprintln!(
        "{}: mean {:.2}% std {:.2} over {} folds ({:.1}s)",
        r.config.label(),
        r.mean,
        r.std,
        r.folds.len(),
        r.seconds
    );
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Constants => constants(),
        Command::Losscheck { points, out } => {
            if points < 2 {
                return Err(Error::InvalidArgument("need at least 2 points".into()).into());
            }
            let rows = experiment::sweep_loss(points);
            let mut buf = Vec::new();
            experiment::write_sweep_csv(&rows, &mut buf)?;
            write_output(out.as_deref(), std::str::from_utf8(&buf)?)?;
        }
        Command::Gradcheck {
            scale,
            seed,
            corrupt_conv,
        } => {
            let report = experiment::run_gradcheck(&GradcheckOptions {
                scale: scale.parse::<Scale>()?,
                seed,
                corrupt_conv_backward: corrupt_conv,
            });
            print!("{report}");
            if !report.passed() {
                return Err(ValidationFailure("gradient check failed".into()).into());
            }
            println!("all components within tolerance");
        }
        Command::Train {
            run,
            checkpoint_dir,
        } => {
            let cfg = run.config()?;
            let format = run.format(ReportFormat::Csv)?;
            let examples = load_examples(&cfg, run.cache.as_deref())?;
            let report = experiment::run_on_examples(&cfg, &examples)?;
            summarize(&report);
            if let Some(dir) = checkpoint_dir {
                fs::create_dir_all(&dir)?;
                for f in &report.folds {
                    checkpoint::save(dir.join(format!("fold{}.glnn", f.fold)), &f.final_params)?;
                }
            }
            emit(&[report], format, run.out.as_deref())?;
        }
        Command::Table1 { run } => {
            let base = run.config()?;
            let format = run.format(ReportFormat::Markdown)?;
            let examples = load_examples(&base, run.cache.as_deref())?;
            let mut reports = Vec::new();
            for which in Canonical::ALL {
                let cfg = base.with_canonical(which);
                let report = experiment::run_on_examples(&cfg, &examples)?;
                summarize(&report);
                reports.push(report);
            }
            emit(&reports, format, run.out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_validation(&e) { 1 } else { 2 })
        }
    }
}
