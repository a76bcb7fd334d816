//! Gradient descent, with and without a momentum term.
//!
//! With momentum the update is `Δw(t) = −η·g(t) + α·Δw(t−1)`, applied as
//! `w ← w + Δw(t)`; the velocity buffer stores `Δw(t)`.

use crate::error::{Error, Result};
use crate::golden;
use crate::nn::ParamSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub eta: f64,
    pub alpha: f64,
    pub momentum_enabled: bool,
}

impl OptimizerConfig {
    /// Golden-ratio learning rate and momentum weight.
    pub fn golden() -> Self {
        Self {
            eta: golden::learning_rate(),
            alpha: golden::momentum_weight(),
            momentum_enabled: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {}",
                self.eta
            )));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::InvalidArgument(format!(
                "momentum weight must lie in [0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self::golden()
    }
}

/// Previous deltas `Δw(t−1)`, one buffer per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Velocity(ParamSet);

impl Velocity {
    pub fn zeros_like(params: &ParamSet) -> Self {
        Self(params.zeros_like())
    }

    pub fn buffers(&self) -> &ParamSet {
        &self.0
    }
}

/// `w ← w − η·g` on trainable entries.
pub fn sgd_step(params: &mut ParamSet, grads: &ParamSet, cfg: &OptimizerConfig) -> Result<()> {
    cfg.validate()?;
    params.check_congruent(grads)?;
    for (p, g) in params.iter_mut().zip(grads.iter()).filter(|(p, _)| p.trainable) {
        for (w, gv) in p.value.data_mut().iter_mut().zip(g.value.data()) {
            *w -= cfg.eta * gv;
        }
    }
    Ok(())
}

/// One step of gradient descent with momentum.
pub fn momentum_step(
    params: &mut ParamSet,
    grads: &ParamSet,
    velocity: &mut Velocity,
    cfg: &OptimizerConfig,
) -> Result<()> {
    cfg.validate()?;
    params.check_congruent(grads)?;
    params.check_congruent(&velocity.0)?;
    for ((p, g), v) in params
        .iter_mut()
        .zip(grads.iter())
        .zip(velocity.0.iter_mut())
        .filter(|((p, _), _)| p.trainable)
    {
        for ((w, gv), dv) in p
            .value
            .data_mut()
            .iter_mut()
            .zip(g.value.data())
            .zip(v.value.data_mut())
        {
            // Adding a zero momentum term would turn -0.0 into +0.0.
            let mut delta = -(cfg.eta * gv);
            if cfg.alpha != 0.0 {
                delta += cfg.alpha * *dv;
            }
            *dv = delta;
            *w += delta;
        }
    }
    Ok(())
}

/// Owns the velocity and dispatches on `momentum_enabled`.
#[derive(Debug, Clone)]
pub struct Optimizer {
    cfg: OptimizerConfig,
    velocity: Velocity,
}

impl Optimizer {
    pub fn new(cfg: OptimizerConfig, params: &ParamSet) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            velocity: Velocity::zeros_like(params),
        })
    }

    pub fn step(&mut self, params: &mut ParamSet, grads: &ParamSet) -> Result<()> {
        if self.cfg.momentum_enabled {
            momentum_step(params, grads, &mut self.velocity, &self.cfg)
        } else {
            sgd_step(params, grads, &self.cfg)
        }
    }

    pub fn velocity(&self) -> &Velocity {
        &self.velocity
    }
}
