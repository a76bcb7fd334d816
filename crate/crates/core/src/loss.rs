//! Golden-ratio information loss, its squared sigmoid form, and the SSE
//! baseline, each with a closed-form derivative with respect to the
//! prediction `y`.
//!
//! The information loss is taken with a leading minus sign,
//! `L_I(d) = −(sin d·ln cos d + cos d·ln sin d)`, so that it is positive,
//! minimal at `d = π/4` and diverges at both ends of `[0, π/2]`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Distance kept from `0` and `π/2` before any logarithm or division.
pub const CLAMP_EPS: f64 = 1e-9;

/// `∂d/∂y`.
const DD_DY: f64 = FRAC_PI_4;

/// Minimum of the information loss, `L_I(π/4) = √2·ln √2`.
pub fn information_loss_min() -> f64 {
    SQRT_2 * SQRT_2.ln()
}

/// Angle `d ∈ [0, π/2]` encoding the signed error between output and target.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AngularDifference(f64);

impl AngularDifference {
    /// Wraps a raw angle, checking the `[0, π/2]` domain.
    pub fn new(d: f64) -> Result<Self> {
        if (0.0..=FRAC_PI_2).contains(&d) {
            Ok(Self(d))
        } else {
            Err(Error::Domain {
                value: d,
                domain: "[0, π/2]",
            })
        }
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// The angle moved inside `[ε, π/2 − ε]`.
    pub fn clamped(self) -> f64 {
        self.0.clamp(CLAMP_EPS, FRAC_PI_2 - CLAMP_EPS)
    }
}

/// `d = (y − t + 1)·π/4` for `y, t ∈ [0, 1]`.
pub fn angular_difference(y: f64, t: f64) -> Result<AngularDifference> {
    for v in [y, t] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain {
                value: v,
                domain: "[0, 1]",
            });
        }
    }
    Ok(AngularDifference(
        ((y - t + 1.0) * FRAC_PI_4).clamp(0.0, FRAC_PI_2),
    ))
}

fn info_loss_at(d: f64) -> f64 {
    let (s, c) = d.sin_cos();
    -(s * c.ln() + c * s.ln())
}

/// Derivative of `L_I` with respect to `d`:
/// `sin²/cos − cos²/sin + sin·ln sin − cos·ln cos`.
fn info_loss_slope(d: f64) -> f64 {
    let (s, c) = d.sin_cos();
    s * s / c - c * c / s + s * s.ln() - c * c.ln()
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Inner sigmoid of the proposed loss, `σ((L_I(d) − min)/√2)`.
fn shifted_sigmoid(d: f64) -> f64 {
    logistic((info_loss_at(d) - information_loss_min()) / SQRT_2)
}

/// Information loss `L_I(d)` on the clamped angle.
pub fn information_loss(d: AngularDifference) -> f64 {
    info_loss_at(d.clamped())
}

/// `L(d) = σ(L_I(d)/√2)`, without the minimum shift.
pub fn sigmoid_loss(d: AngularDifference) -> f64 {
    logistic(information_loss(d) / SQRT_2)
}

/// `dL/dy` for [`sigmoid_loss`]: `π/(4√2)·L·(1 − L)·B(d)`.
pub fn sigmoid_loss_grad(d: AngularDifference) -> f64 {
    let d = d.clamped();
    let l = logistic(info_loss_at(d) / SQRT_2);
    l * (1.0 - l) * info_loss_slope(d) * DD_DY / SQRT_2
}

/// Proposed loss `Loss(d) = σ((L_I(d) − min)/√2)²`, with range `[0.25, 1)`.
pub fn proposed_loss(d: AngularDifference) -> f64 {
    let s = shifted_sigmoid(d.clamped());
    s * s
}

/// `dLoss/dy = 2S · S(1 − S) · π/(4√2) · B(d)`, the exact chain rule
/// through the square, the sigmoid, `L_I` and `∂d/∂y = π/4`.
pub fn proposed_loss_grad(d: AngularDifference) -> f64 {
    let d = d.clamped();
    let s = shifted_sigmoid(d);
    2.0 * s * s * (1.0 - s) * info_loss_slope(d) * DD_DY / SQRT_2
}

/// Predictions and one-hot targets, both `N × K`.
#[derive(Debug, Clone, Copy)]
pub struct LossBatch<'a> {
    predictions: &'a Tensor,
    targets: &'a Tensor,
}

impl<'a> LossBatch<'a> {
    pub fn new(predictions: &'a Tensor, targets: &'a Tensor) -> Result<Self> {
        if predictions.shape().len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "predictions must be N×K, got {:?}",
                predictions.shape()
            )));
        }
        if predictions.shape() != targets.shape() {
            return Err(Error::shape(predictions.shape(), targets.shape()));
        }
        let k = targets.shape()[1];
        for row in targets.data().chunks(k) {
            let ones = row.iter().filter(|&&v| v == 1.0).count();
            let zeros = row.iter().filter(|&&v| v == 0.0).count();
            if ones != 1 || zeros != k - 1 {
                return Err(Error::InvalidArgument(
                    "every target row must be one-hot".into(),
                ));
            }
        }
        if let Some(&y) = predictions.data().iter().find(|y| !(0.0..=1.0).contains(*y)) {
            return Err(Error::Domain {
                value: y,
                domain: "[0, 1]",
            });
        }
        Ok(Self {
            predictions,
            targets,
        })
    }

    pub fn observations(&self) -> usize {
        self.predictions.shape()[0]
    }

    pub fn classes(&self) -> usize {
        self.predictions.shape()[1]
    }

    fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + 'a {
        self.predictions
            .data()
            .iter()
            .copied()
            .zip(self.targets.data().iter().copied())
    }

    fn mean_over_rows(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let total: f64 = self.pairs().map(|(y, t)| f(y, t)).sum();
        total / self.observations() as f64
    }

    fn elementwise(&self, f: impl Fn(f64, f64) -> f64) -> Tensor {
        let n = self.observations() as f64;
        let data = self.pairs().map(|(y, t)| f(y, t) / n).collect();
        Tensor::from_vec(self.predictions.shape().to_vec(), data)
            .expect("shape taken from predictions")
    }
}

fn unchecked_angle(y: f64, t: f64) -> AngularDifference {
    AngularDifference(((y - t + 1.0) * FRAC_PI_4).clamp(0.0, FRAC_PI_2))
}

/// `(1/N)·Σₙ Σₖ Loss(d(Yₙₖ, Tₙₖ))`.
pub fn batch_proposed_loss(batch: &LossBatch<'_>) -> f64 {
    batch.mean_over_rows(|y, t| proposed_loss(unchecked_angle(y, t)))
}

/// Entry `(n, k)` is `(1/N)·dLoss/dy` at `(Yₙₖ, Tₙₖ)`.
pub fn batch_proposed_grad(batch: &LossBatch<'_>) -> Tensor {
    batch.elementwise(|y, t| proposed_loss_grad(unchecked_angle(y, t)))
}

/// `(1/N)·Σₙ Σₖ (Yₙₖ − Tₙₖ)²`.
pub fn sse_loss(batch: &LossBatch<'_>) -> f64 {
    batch.mean_over_rows(|y, t| (y - t) * (y - t))
}

/// `2·(Y − T)/N`.
pub fn sse_grad(batch: &LossBatch<'_>) -> Tensor {
    batch.elementwise(|y, t| 2.0 * (y - t))
}

/// Which training loss a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Sse,
    Proposed,
}

impl LossKind {
    pub fn loss(self, batch: &LossBatch<'_>) -> f64 {
        match self {
            LossKind::Sse => sse_loss(batch),
            LossKind::Proposed => batch_proposed_loss(batch),
        }
    }

    pub fn grad(self, batch: &LossBatch<'_>) -> Tensor {
        match self {
            LossKind::Sse => sse_grad(batch),
            LossKind::Proposed => batch_proposed_grad(batch),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::Sse => "sse",
            LossKind::Proposed => "proposed",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sse" => Ok(LossKind::Sse),
            "proposed" | "golden" => Ok(LossKind::Proposed),
            other => Err(Error::InvalidArgument(format!(
                "unknown loss `{other}` (expected sse or proposed)"
            ))),
        }
    }
}
