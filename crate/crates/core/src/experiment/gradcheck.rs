//! Finite-difference verification of every closed-form derivative in the
//! crate: the loss gradients and each layer's backward pass, separately
//! and composed end to end.
//!
//! An entry agrees when `|analytic − numeric| ≤ tol·max(|analytic|,
//! |numeric|) + ABS_FLOOR`. The floor only matters for entries whose true
//! gradient vanishes, where a relative comparison is meaningless.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::loss::{self, AngularDifference, LossBatch, LossKind};
use crate::nn::activation::{relu_backward, relu_forward, softmax_backward, softmax_forward};
use crate::nn::batchnorm::{batchnorm_backward, batchnorm_forward, BnMode};
use crate::nn::conv::{conv_backward, conv_forward};
use crate::nn::dense::{dense_backward, dense_forward};
use crate::nn::{LayerSpec, Mode, NetworkSpec, ParamSet};
use crate::seed::{self, Purpose};
use crate::tensor::Tensor;

pub const ABS_FLOOR: f64 = 1e-9;
/// Step for the loss-function oracles.
pub const LOSS_STEP: f64 = 1e-6;
/// Step for layer and network oracles.
pub const LAYER_STEP: f64 = 1e-6;
/// SSE is quadratic, so a large step has no truncation error and less
/// cancellation.
pub const SSE_STEP: f64 = 1e-4;

pub const TOL_LOSS: f64 = 1e-6;
pub const TOL_SSE: f64 = 1e-8;
pub const TOL_LAYER: f64 = 1e-5;
pub const TOL_DENSE: f64 = 1e-6;
pub const TOL_NET_PROPOSED: f64 = 1e-4;
pub const TOL_NET_SSE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// Small shapes; the whole suite takes well under a second.
    Tiny,
    /// Conv checks at 28×28×1 → 20@5×5 and the full digit classifier end to end.
    Fig3,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tiny" => Ok(Scale::Tiny),
            "fig3" | "full" => Ok(Scale::Fig3),
            other => Err(Error::InvalidArgument(format!("unknown scale `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradcheckOptions {
    pub scale: Scale,
    pub seed: u64,
    /// Negative control: inflates the analytic conv backward by 5% so the
    /// conv components must fail.
    pub corrupt_conv_backward: bool,
}

impl Default for GradcheckOptions {
    fn default() -> Self {
        Self {
            scale: Scale::Tiny,
            seed: 7,
            corrupt_conv_backward: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentCheck {
    pub name: String,
    pub samples: usize,
    pub tolerance: f64,
    /// Largest relative error among entries with magnitude above the floor.
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub failures: usize,
}

impl ComponentCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.samples > 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    pub components: Vec<ComponentCheck>,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.components.iter().all(ComponentCheck::passed)
    }

    pub fn get(&self, name: &str) -> Option<&ComponentCheck> {
        self.components.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for GradcheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<28} {:>7} {:>9} {:>12} {:>12}  status", "component", "samples", "tol", "max_rel", "max_abs")?;
        for c in &self.components {
            writeln!(
                f,
                "{:<28} {:>7} {:>9.0e} {:>12.3e} {:>12.3e}  {}",
                c.name,
                c.samples,
                c.tolerance,
                c.max_rel_error,
                c.max_abs_error,
                if c.passed() { "ok" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

fn compare(name: &str, tol: f64, pairs: impl IntoIterator<Item = (f64, f64)>) -> ComponentCheck {
    let mut c = ComponentCheck {
        name: name.to_owned(),
        samples: 0,
        tolerance: tol,
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        failures: 0,
    };
    for (analytic, numeric) in pairs {
        c.samples += 1;
        let diff = (analytic - numeric).abs();
        let scale = analytic.abs().max(numeric.abs());
        c.max_abs_error = c.max_abs_error.max(diff);
        if scale > ABS_FLOOR {
            c.max_rel_error = c.max_rel_error.max(diff / scale);
        }
        if diff.is_nan() || diff > tol * scale + ABS_FLOOR {
            c.failures += 1;
        }
    }
    c
}

fn central(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn random_tensor(shape: &[usize], lo: f64, hi: f64, rng: &mut impl Rng) -> Tensor {
    let len = shape.iter().product();
    Tensor::from_vec(shape.to_vec(), (0..len).map(|_| rng.gen_range(lo..hi)).collect())
        .expect("consistent shape")
}

fn dot(a: &Tensor, b: &Tensor) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

/// Numeric derivative of `f` with respect to entry `i` of `t`.
fn fd_entry(t: &Tensor, i: usize, h: f64, f: impl Fn(&Tensor) -> f64) -> f64 {
    let mut probe = t.clone();
    central(
        |v| {
            probe.data_mut()[i] = v;
            f(&probe)
        },
        t.data()[i],
        h,
    )
}

fn pick(len: usize, count: usize, rng: &mut impl Rng) -> Vec<usize> {
    if count >= len {
        (0..len).collect()
    } else {
        index::sample(rng, len, count).into_vec()
    }
}

fn random_targets(n: usize, k: usize, rng: &mut impl Rng) -> Tensor {
    let mut t = Tensor::zeros([n, k]);
    for row in t.data_mut().chunks_mut(k) {
        row[rng.gen_range(0..k)] = 1.0;
    }
    t
}

/// Analytic `dLoss/dy` at 10³ random angles against central differences in `y`.
pub fn check_proposed_scalar(rng: &mut impl Rng) -> ComponentCheck {
    let pairs: Vec<_> = (0..1000)
        .map(|_| {
            let d = rng.gen_range(0.01..FRAC_PI_2 - 0.01);
            let loss_at = |y_shift: f64| {
                loss::proposed_loss(AngularDifference::new(d + y_shift * FRAC_PI_4).expect("inside"))
            };
            let numeric = central(loss_at, 0.0, LOSS_STEP);
            let analytic = loss::proposed_loss_grad(AngularDifference::new(d).expect("inside"));
            (analytic, numeric)
        })
        .collect();
    // No absolute floor here: this check is purely relative.
    let mut c = compare("loss.proposed_scalar", TOL_LOSS, pairs.iter().copied());
    c.failures = pairs
        .iter()
        .filter(|(a, n)| {
            let diff = (a - n).abs();
            diff.is_nan() || diff > TOL_LOSS * a.abs().max(n.abs())
        })
        .count();
    c.max_rel_error = pairs
        .iter()
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()))
        .fold(0.0, f64::max);
    c
}

fn check_batch_loss(kind: LossKind, name: &str, tol: f64, h: f64, rng: &mut impl Rng) -> ComponentCheck {
    let (n, k) = (8, 10);
    let targets = random_targets(n, k, rng);
    let preds = random_tensor(&[n, k], 0.02, 0.98, rng);
    let batch = LossBatch::new(&preds, &targets).expect("valid batch");
    let grad = kind.grad(&batch);
    let pairs = (0..n * k).map(|i| {
        let numeric = fd_entry(&preds, i, h, |p| kind.loss(&LossBatch::new(p, &targets).expect("valid")));
        (grad.data()[i], numeric)
    });
    compare(name, tol, pairs.collect::<Vec<_>>())
}

fn check_conv(
    input_shape: &[usize],
    weight_shape: &[usize],
    opts: &GradcheckOptions,
    rng: &mut impl Rng,
) -> Vec<ComponentCheck> {
    let x = random_tensor(input_shape, 0.0, 1.0, rng);
    let w = random_tensor(weight_shape, -0.5, 0.5, rng);
    let b = random_tensor(&[weight_shape[0]], -0.1, 0.1, rng);
    let out0 = conv_forward(&x, &w, &b).expect("conv shapes");
    let proj = random_tensor(out0.shape(), -1.0, 1.0, rng);
    let objective = |x: &Tensor, w: &Tensor, b: &Tensor| dot(&conv_forward(x, w, b).expect("conv"), &proj);
    let mut g = conv_backward(&proj, &x, &w, true).expect("conv backward");
    if opts.corrupt_conv_backward {
        for v in g.weights.data_mut() {
            *v *= 1.05;
        }
        for v in g.input.as_mut().expect("requested").data_mut() {
            *v *= 1.05;
        }
    }
    let gin = g.input.as_ref().expect("requested");
    let wi = pick(w.len(), 20, rng);
    let xi = pick(x.len(), 20, rng);
    vec![
        compare(
            "conv.weights",
            TOL_LAYER,
            wi.iter()
                .map(|&i| (g.weights.data()[i], fd_entry(&w, i, LAYER_STEP, |w| objective(&x, w, &b))))
                .collect::<Vec<_>>(),
        ),
        compare(
            "conv.biases",
            TOL_LAYER,
            (0..b.len())
                .map(|i| (g.biases.data()[i], fd_entry(&b, i, LAYER_STEP, |b| objective(&x, &w, b))))
                .collect::<Vec<_>>(),
        ),
        compare(
            "conv.input",
            TOL_LAYER,
            xi.iter()
                .map(|&i| (gin.data()[i], fd_entry(&x, i, LAYER_STEP, |x| objective(x, &w, &b))))
                .collect::<Vec<_>>(),
        ),
    ]
}

fn check_batchnorm(rng: &mut impl Rng) -> Vec<ComponentCheck> {
    let x = random_tensor(&[2, 3, 4, 4], -2.0, 3.0, rng);
    let gamma = random_tensor(&[3], 0.5, 1.5, rng);
    let beta = random_tensor(&[3], -0.5, 0.5, rng);
    let proj = random_tensor(x.shape(), -1.0, 1.0, rng);
    let objective = |x: &Tensor, g: &Tensor, b: &Tensor| {
        dot(&batchnorm_forward(x, g, b, None, BnMode::Train).expect("bn").0, &proj)
    };
    let (_, cache) = batchnorm_forward(&x, &gamma, &beta, None, BnMode::Train).expect("bn");
    let g = batchnorm_backward(&proj, &cache, &gamma).expect("bn backward");
    let xi = pick(x.len(), 20, rng);
    vec![
        compare(
            "batchnorm.input",
            TOL_LAYER,
            xi.iter()
                .map(|&i| (g.input.data()[i], fd_entry(&x, i, LAYER_STEP, |x| objective(x, &gamma, &beta))))
                .collect::<Vec<_>>(),
        ),
        compare(
            "batchnorm.gamma",
            TOL_LAYER,
            (0..3)
                .map(|i| (g.gamma.data()[i], fd_entry(&gamma, i, LAYER_STEP, |gm| objective(&x, gm, &beta))))
                .collect::<Vec<_>>(),
        ),
        compare(
            "batchnorm.beta",
            TOL_LAYER,
            (0..3)
                .map(|i| (g.beta.data()[i], fd_entry(&beta, i, LAYER_STEP, |bt| objective(&x, &gamma, bt))))
                .collect::<Vec<_>>(),
        ),
    ]
}

fn check_relu(rng: &mut impl Rng) -> ComponentCheck {
    // Keep inputs away from the kink so the central difference is exact.
    let mut x = random_tensor(&[3, 7], -1.0, 1.0, rng);
    for v in x.data_mut() {
        if v.abs() < 0.01 {
            *v += 0.05;
        }
    }
    let proj = random_tensor(x.shape(), -1.0, 1.0, rng);
    let g = relu_backward(&proj, &x).expect("relu");
    let pairs = (0..x.len()).map(|i| (g.data()[i], fd_entry(&x, i, LAYER_STEP, |x| dot(&relu_forward(x), &proj))));
    compare("relu", TOL_LAYER, pairs.collect::<Vec<_>>())
}

fn check_dense(rng: &mut impl Rng) -> Vec<ComponentCheck> {
    let x = random_tensor(&[4, 8], -1.0, 1.0, rng);
    let w = random_tensor(&[3, 8], -0.5, 0.5, rng);
    let b = random_tensor(&[3], -0.1, 0.1, rng);
    let proj = random_tensor(&[4, 3], -1.0, 1.0, rng);
    let objective = |x: &Tensor, w: &Tensor, b: &Tensor| dot(&dense_forward(x, w, b).expect("dense"), &proj);
    let g = dense_backward(&proj, &x, &w).expect("dense backward");
    vec![
        compare(
            "dense.weights",
            TOL_DENSE,
            (0..w.len())
                .map(|i| (g.weights.data()[i], fd_entry(&w, i, LAYER_STEP, |w| objective(&x, w, &b))))
                .collect::<Vec<_>>(),
        ),
        compare(
            "dense.biases",
            TOL_DENSE,
            (0..b.len())
                .map(|i| (g.biases.data()[i], fd_entry(&b, i, LAYER_STEP, |b| objective(&x, &w, b))))
                .collect::<Vec<_>>(),
        ),
        compare(
            "dense.input",
            TOL_DENSE,
            (0..x.len())
                .map(|i| (g.input.data()[i], fd_entry(&x, i, LAYER_STEP, |x| objective(x, &w, &b))))
                .collect::<Vec<_>>(),
        ),
    ]
}

fn check_softmax(rng: &mut impl Rng) -> ComponentCheck {
    let x = random_tensor(&[3, 5], -2.0, 2.0, rng);
    let proj = random_tensor(x.shape(), -1.0, 1.0, rng);
    let y = softmax_forward(&x).expect("softmax");
    let g = softmax_backward(&proj, &y).expect("softmax backward");
    let pairs = (0..x.len())
        .map(|i| (g.data()[i], fd_entry(&x, i, LAYER_STEP, |x| dot(&softmax_forward(x).expect("softmax"), &proj))));
    compare("softmax", TOL_LAYER, pairs.collect::<Vec<_>>())
}

/// End-to-end check: loss through the whole network against perturbations
/// of `samples` randomly chosen trainable scalars.
pub fn check_network(
    name: &str,
    spec: &NetworkSpec,
    batch_size: usize,
    kind: LossKind,
    tol: f64,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> ComponentCheck {
    let params = spec.init_params(rng);
    let mut shape = vec![batch_size];
    shape.extend_from_slice(spec.input_shape());
    let x = random_tensor(&shape, 0.0, 1.0, rng);
    let targets = random_targets(batch_size, spec.classes(), rng);
    let value = |p: &ParamSet| {
        let (y, _) = spec.forward(p, &x, Mode::Train).expect("forward");
        kind.loss(&LossBatch::new(&y, &targets).expect("valid batch"))
    };
    let (y, cache) = spec.forward(&params, &x, Mode::Train).expect("forward");
    let dy = kind.grad(&LossBatch::new(&y, &targets).expect("valid batch"));
    let grads = spec.backward(&params, &cache, &dy).expect("backward");

    let slots: Vec<(usize, usize)> = params
        .iter()
        .enumerate()
        .filter(|(_, p)| p.trainable)
        .flat_map(|(pi, p)| (0..p.value.len()).map(move |e| (pi, e)))
        .collect();
    let chosen = pick(slots.len(), samples, rng);
    let pairs: Vec<_> = chosen
        .iter()
        .map(|&s| {
            let (pi, e) = slots[s];
            let mut probe = params.clone();
            let x0 = params.tensor(pi).data()[e];
            let numeric = central(
                |v| {
                    probe.tensor_mut(pi).data_mut()[e] = v;
                    value(&probe)
                },
                x0,
                LAYER_STEP,
            );
            (grads.tensor(pi).data()[e], numeric)
        })
        .collect();
    compare(name, tol, pairs)
}

fn tiny_network() -> NetworkSpec {
    NetworkSpec::new(
        [1, 6, 6],
        vec![
            LayerSpec::Conv {
                out_channels: 2,
                kernel: 3,
            },
            LayerSpec::Relu,
            LayerSpec::Dense { out: 3 },
            LayerSpec::Softmax,
        ],
    )
    .expect("tiny network chains")
}

/// Runs every oracle suite. Deterministic for a given `opts.seed`.
pub fn run_gradcheck(opts: &GradcheckOptions) -> GradcheckReport {
    let mut rng = seed::stream(opts.seed, Purpose::Synthetic, 0);
    let mut components = vec![
        check_proposed_scalar(&mut rng),
        check_batch_loss(LossKind::Proposed, "loss.proposed_batch", TOL_LOSS, LOSS_STEP, &mut rng),
        check_batch_loss(LossKind::Sse, "loss.sse_batch", TOL_SSE, SSE_STEP, &mut rng),
    ];
    let (conv_in, conv_w): (&[usize], &[usize]) = match opts.scale {
        Scale::Tiny => (&[2, 2, 7, 7], &[3, 2, 3, 3]),
        Scale::Fig3 => (&[1, 1, 28, 28], &[20, 1, 5, 5]),
    };
    components.extend(check_conv(conv_in, conv_w, opts, &mut rng));
    components.extend(check_batchnorm(&mut rng));
    components.push(check_relu(&mut rng));
    components.extend(check_dense(&mut rng));
    components.push(check_softmax(&mut rng));

    let (spec, batch) = match opts.scale {
        Scale::Tiny => (tiny_network(), 4),
        Scale::Fig3 => (NetworkSpec::digit_classifier(), 2),
    };
    components.push(check_network("network.proposed", &spec, batch, LossKind::Proposed, TOL_NET_PROPOSED, 50, &mut rng));
    components.push(check_network("network.sse", &spec, batch, LossKind::Sse, TOL_NET_SSE, 50, &mut rng));
    GradcheckReport { components }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_suite_passes() {
        let report = run_gradcheck(&GradcheckOptions::default());
        assert!(report.passed(), "\n{report}");
        assert_eq!(report.get("loss.proposed_scalar").unwrap().samples, 1000);
        assert_eq!(report.get("network.proposed").unwrap().samples, 50);
    }

    #[test]
    fn corrupted_conv_is_caught() {
        let report = run_gradcheck(&GradcheckOptions {
            corrupt_conv_backward: true,
            ..Default::default()
        });
        assert!(!report.passed());
        assert!(!report.get("conv.weights").unwrap().passed());
        assert!(!report.get("conv.input").unwrap().passed());
        assert!(report.get("dense.weights").unwrap().passed());
    }

    #[test]
    fn repeatable() {
        let a = run_gradcheck(&GradcheckOptions::default());
        let b = run_gradcheck(&GradcheckOptions::default());
        assert_eq!(a, b);
    }

    #[test]
    fn equilibrium_gradient_vanishes() {
        let g = loss::proposed_loss_grad(AngularDifference::new(FRAC_PI_4).unwrap());
        assert!(g.abs() < 1e-14);
    }
}
