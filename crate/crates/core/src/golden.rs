//! Golden-ratio roots and the optimizer constants derived from them.
//!
//! Everything here is computed from `√5` at full double precision. The
//! rounded values 0.618, 0.874 and 0.016 are display approximations only.

use crate::error::{Error, Result};

/// Roots of `p² + p − 1 = 0` and the hyperparameters they imply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenConstants {
    /// Positive root `(√5 − 1)/2`.
    pub p1: f64,
    /// Negative root `(−√5 − 1)/2`.
    pub p2: f64,
    /// Momentum weight `p1·√2`.
    pub alpha: f64,
    /// Learning rate `(1 − alpha)²`.
    pub eta: f64,
}

impl GoldenConstants {
    pub fn new() -> Self {
        let (p1, p2) = golden_roots();
        let alpha = alpha_from_root(p1);
        Self {
            p1,
            p2,
            alpha,
            eta: eta_from_alpha(alpha),
        }
    }
}

impl Default for GoldenConstants {
    fn default() -> Self {
        Self::new()
    }
}

/// `(p1, p2) = ((√5 − 1)/2, (−√5 − 1)/2)`.
pub fn golden_roots() -> (f64, f64) {
    let s5 = 5f64.sqrt();
    ((s5 - 1.0) / 2.0, (-s5 - 1.0) / 2.0)
}

fn alpha_from_root(p1: f64) -> f64 {
    p1 * std::f64::consts::SQRT_2
}

fn eta_from_alpha(alpha: f64) -> f64 {
    let c = 1.0 - alpha;
    c * c
}

/// Momentum weight `α = p1·√2 ≈ 0.874032`.
pub fn momentum_weight() -> f64 {
    alpha_from_root(golden_roots().0)
}

/// Learning rate `η = (1 − α)² ≈ 0.015868`.
pub fn learning_rate() -> f64 {
    eta_from_alpha(momentum_weight())
}

/// Extracellular signal level `p`, restricted to `[1/2, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SignalLevel(f64);

impl SignalLevel {
    pub fn new(p: f64) -> Result<Self> {
        if (0.5..=1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(Error::Domain {
                value: p,
                domain: "[0.5, 1]",
            })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Expected information `E = −p·ln((1 − p)/p)`.
///
/// At `p = 1` the logarithm diverges and the boundary value `+∞` is
/// returned so that sweeps can include the endpoint.
pub fn expected_information(p: SignalLevel) -> f64 {
    let p = p.0;
    if p >= 1.0 {
        return f64::INFINITY;
    }
    -p * ((1.0 - p) / p).ln()
}
