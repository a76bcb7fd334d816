//! Browser bindings for `www/index.html`: the loss curve, digit rotation,
//! and a momentum trajectory on a one-dimensional quadratic bowl.

use glnn::data::{rotate_image, LabeledImage, PIXELS};
use glnn::golden::GoldenConstants;
use glnn::nn::ParamSet;
use glnn::optim::{Optimizer, OptimizerConfig};
use glnn::Tensor;
use wasm_bindgen::prelude::*;

/// `[p1, p2, alpha, eta]`.
pub fn constants_inner() -> [f64; 4] {
    let g = GoldenConstants::new();
    [g.p1, g.p2, g.alpha, g.eta]
}

/// Rows of `[d, info_loss, sigmoid_loss, loss, dloss_dy]`, flattened.
pub fn loss_curve_inner(points: usize) -> Result<Vec<f64>, String> {
    if points < 2 {
        return Err("need at least 2 points".into());
    }
    Ok(glnn::experiment::sweep_loss(points)
        .iter()
        .flat_map(|r| [r.d, r.info, r.sigmoid, r.loss, r.grad])
        .collect())
}

/// Rotates a row-major 28×28 image with values in `[0, 1]`.
pub fn rotate_inner(pixels: &[f64], angle_deg: f64) -> Result<Vec<f64>, String> {
    if pixels.len() != PIXELS {
        return Err(format!("expected {PIXELS} pixels, got {}", pixels.len()));
    }
    let img = LabeledImage::new(pixels.to_vec(), 0).map_err(|e| e.to_string())?;
    Ok(rotate_image(&img, angle_deg)
        .map_err(|e| e.to_string())?
        .pixels()
        .to_vec())
}

/// Positions `w_0..=w_steps` when minimising `f(w) = ½·curvature·w²` from
/// `start` with the momentum update.
pub fn trajectory_inner(
    eta: f64,
    alpha: f64,
    curvature: f64,
    start: f64,
    steps: usize,
) -> Result<Vec<f64>, String> {
    if !(curvature.is_finite() && curvature > 0.0) {
        return Err("curvature must be positive".into());
    }
    let mut params = ParamSet::default();
    params.push("w", Tensor::full([1], start), true);
    let cfg = OptimizerConfig {
        eta,
        alpha,
        momentum_enabled: true,
    };
    let mut opt = Optimizer::new(cfg, &params).map_err(|e| e.to_string())?;
    let mut path = Vec::with_capacity(steps + 1);
    path.push(start);
    for _ in 0..steps {
        let w = params.tensor(0).data()[0];
        let mut grad = ParamSet::default();
        grad.push("w", Tensor::full([1], curvature * w), true);
        opt.step(&mut params, &grad).map_err(|e| e.to_string())?;
        path.push(params.tensor(0).data()[0]);
    }
    Ok(path)
}

#[wasm_bindgen]
pub fn constants() -> Vec<f64> {
    constants_inner().to_vec()
}

#[wasm_bindgen]
pub fn loss_curve(points: usize) -> Result<Vec<f64>, JsError> {
    loss_curve_inner(points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn rotate_digit(pixels: &[f64], angle_deg: f64) -> Result<Vec<f64>, JsError> {
    rotate_inner(pixels, angle_deg).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn momentum_trajectory(
    eta: f64,
    alpha: f64,
    curvature: f64,
    start: f64,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    trajectory_inner(eta, alpha, curvature, start, steps).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_golden() {
        let [p1, p2, alpha, eta] = constants_inner();
        assert!((p1 + p2 + 1.0).abs() < 1e-15);
        assert!((alpha - p1 * 2f64.sqrt()).abs() < 1e-15);
        assert!((eta - (1.0 - alpha).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn curve_rows() {
        let c = loss_curve_inner(101).unwrap();
        assert_eq!(c.len(), 505);
        assert!((c[50 * 5 + 3] - 0.25).abs() < 1e-12);
        assert!(loss_curve_inner(1).is_err());
    }

    #[test]
    fn rotation_checks_input() {
        let mut px = vec![0.0; PIXELS];
        px[14 * 28 + 14] = 1.0;
        assert_eq!(rotate_inner(&px, 0.0).unwrap(), px);
        assert!(rotate_inner(&px[..10], 0.0).is_err());
        assert!(rotate_inner(&px, 90.0).is_err());
    }

    #[test]
    fn golden_trajectory_converges() {
        let [_, _, alpha, eta] = constants_inner();
        let path = trajectory_inner(eta, alpha, 1.0, 1.0, 400).unwrap();
        assert_eq!(path.len(), 401);
        assert!(path[400].abs() < 1e-3);
        // Heavy-ball recurrence w' = w − ηcw + α(w − w_prev).
        let w2 = path[1] - eta * path[1] + alpha * (path[1] - path[0]);
        assert!((path[2] - w2).abs() < 1e-15);
        assert!(trajectory_inner(eta, 1.5, 1.0, 1.0, 3).is_err());
    }
}
