//! Training toolkit built around a golden-ratio information loss.
//!
//! The loss compares a network output `y` with its target `t` through the
//! angular difference `d = (y - t + 1)·π/4`, and the optimizer runs with a
//! momentum weight and learning rate derived from the positive root of
//! `p² + p − 1 = 0` rather than tuned by search.
//!
//! - [`golden`]: roots, identities, `α = p1·√2`, `η = (1 − α)²`
//! - [`loss`]: information loss, sigmoid loss, squared proposed loss, SSE
//! - [`tensor`] and [`nn`]: dense tensors and a hand-written conv layer stack
//! - [`optim`]: plain gradient descent and gradient descent with momentum
//! - [`data`]: IDX ingestion, rotation augmentation, k-fold plans
//! - [`experiment`]: cross-validation harness, gradient checks, reports

pub mod data;
pub mod error;
pub mod experiment;
pub mod golden;
pub mod loss;
pub mod nn;
pub mod optim;
pub mod seed;
pub mod tensor;

pub use error::{Error, Result};
pub use golden::GoldenConstants;
pub use loss::{AngularDifference, LossBatch, LossKind};
pub use tensor::Tensor;
