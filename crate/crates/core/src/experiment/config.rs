use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::golden;
use crate::loss::LossKind;
use crate::optim::OptimizerConfig;

/// Learning rate commonly used with plain SSE training.
pub const SSE_ETA: f64 = 0.01;
/// Momentum weight commonly used with SSE training.
pub const SSE_ALPHA: f64 = 0.9;

/// The three configurations of the comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Canonical {
    SseWithoutMomentum,
    SseWithMomentum,
    ProposedWithMomentum,
}

impl Canonical {
    pub const ALL: [Canonical; 3] = [
        Canonical::SseWithoutMomentum,
        Canonical::SseWithMomentum,
        Canonical::ProposedWithMomentum,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub loss: LossKind,
    pub momentum: bool,
    pub eta: f64,
    pub alpha: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub folds: usize,
    pub repeats: usize,
    pub seed: u64,
    pub images: PathBuf,
    pub labels: PathBuf,
    /// Rotations are drawn from `[−angle_range, angle_range]` degrees.
    pub angle_range: f64,
    /// Seeded subset of the corpus to use; `None` keeps everything.
    pub subset: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            loss: LossKind::Proposed,
            momentum: true,
            eta: golden::learning_rate(),
            alpha: golden::momentum_weight(),
            epochs: 30,
            batch_size: 128,
            folds: 10,
            repeats: 1,
            seed: 2020,
            images: PathBuf::from("data/digits-images-idx3-ubyte.gz"),
            labels: PathBuf::from("data/digits-labels-idx1-ubyte.gz"),
            angle_range: 45.0,
            subset: None,
        }
    }
}

impl ExperimentConfig {
    /// `self` with the loss and optimizer settings of a table row.
    pub fn with_canonical(&self, which: Canonical) -> Self {
        let (loss, momentum, eta, alpha) = match which {
            Canonical::SseWithoutMomentum => (LossKind::Sse, false, SSE_ETA, 0.0),
            Canonical::SseWithMomentum => (LossKind::Sse, true, SSE_ETA, SSE_ALPHA),
            Canonical::ProposedWithMomentum => (
                LossKind::Proposed,
                true,
                golden::learning_rate(),
                golden::momentum_weight(),
            ),
        };
        Self {
            loss,
            momentum,
            eta,
            alpha,
            ..self.clone()
        }
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            eta: self.eta,
            alpha: if self.momentum { self.alpha } else { 0.0 },
            momentum_enabled: self.momentum,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.optimizer().validate()?;
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::InvalidArgument(format!("alpha {} outside [0, 1)", self.alpha)));
        }
        if self.batch_size < 2 {
            return Err(Error::InvalidArgument(
                "batch size must be at least 2 for batch normalization".into(),
            ));
        }
        if self.folds < 2 {
            return Err(Error::InvalidArgument("need at least 2 folds".into()));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidArgument("repeats must be positive".into()));
        }
        if !(0.0..=45.0).contains(&self.angle_range) {
            return Err(Error::InvalidArgument(format!(
                "angle range {} outside [0, 45]",
                self.angle_range
            )));
        }
        Ok(())
    }

    /// Row label used in the comparison table.
    pub fn label(&self) -> String {
        let loss = match self.loss {
            LossKind::Sse => "SSE",
            LossKind::Proposed => "Golden loss",
        };
        let m = if self.momentum { "with" } else { "without" };
        format!("{loss} {m} momentum")
    }

    /// Applies one `key=value` setting. Keys match the long CLI flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T>
        where
            T::Err: fmt::Display,
        {
            v.parse()
                .map_err(|e| Error::InvalidArgument(format!("{key}={v}: {e}")))
        }
        match key.trim().replace('_', "-").as_str() {
            "loss" => self.loss = value.parse()?,
            "momentum" => self.momentum = num(key, value)?,
            "eta" => self.eta = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "batch-size" => self.batch_size = num(key, value)?,
            "folds" => self.folds = num(key, value)?,
            "repeats" => self.repeats = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "images" => self.images = PathBuf::from(value),
            "labels" => self.labels = PathBuf::from(value),
            "angle-range" => self.angle_range = num(key, value)?,
            "subset" => self.subset = Some(num(key, value)?),
            other => {
                return Err(Error::InvalidArgument(format!("unknown config key `{other}`")))
            }
        }
        Ok(())
    }

    /// Applies a `key=value` file; blank lines and `#` comments are skipped.
    pub fn apply_file_contents(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("line {}: expected key=value", lineno + 1))
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// `key=value` lines that [`apply_file_contents`](Self::apply_file_contents) reads back.
    pub fn snapshot(&self) -> String {
        let mut s = format!(
            "loss={}\nmomentum={}\neta={}\nalpha={}\nepochs={}\nbatch-size={}\nfolds={}\nrepeats={}\nseed={}\nimages={}\nlabels={}\nangle-range={}\n",
            self.loss,
            self.momentum,
            self.eta,
            self.alpha,
            self.epochs,
            self.batch_size,
            self.folds,
            self.repeats,
            self.seed,
            self.images.display(),
            self.labels.display(),
            self.angle_range,
        );
        if let Some(n) = self.subset {
            s.push_str(&format!("subset={n}\n"));
        }
        s
    }
}
