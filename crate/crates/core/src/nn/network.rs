//! Sequential network description plus the batched forward and backward
//! passes over a [`ParamSet`].

use rand::Rng;

use super::activation::{relu_backward, relu_forward, softmax_backward, softmax_forward};
use super::batchnorm::{
    batchnorm_backward, batchnorm_forward, BatchNormCache, BnMode, RunningStats,
};
use super::conv::{conv_backward, conv_forward, output_shape};
use super::dense::{dense_backward, dense_forward};
use super::params::ParamSet;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSpec {
    Conv { out_channels: usize, kernel: usize },
    BatchNorm,
    Relu,
    Dense { out: usize },
    Softmax,
}

impl LayerSpec {
    fn tag(self) -> &'static str {
        match self {
            LayerSpec::Conv { .. } => "conv",
            LayerSpec::BatchNorm => "bn",
            LayerSpec::Relu => "relu",
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::Softmax => "softmax",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Validated layer list with the per-sample shape after every layer.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    input: Vec<usize>,
    layers: Vec<LayerSpec>,
    shapes: Vec<Vec<usize>>,
}

impl NetworkSpec {
    /// `input` is the per-sample `[channels, height, width]`.
    pub fn new(input: [usize; 3], layers: Vec<LayerSpec>) -> Result<Self> {
        if input.contains(&0) {
            return Err(Error::Network(format!("empty input shape {input:?}")));
        }
        let mut shape = input.to_vec();
        let mut shapes = Vec::with_capacity(layers.len());
        for (i, layer) in layers.iter().enumerate() {
            shape = match *layer {
                LayerSpec::Conv {
                    out_channels,
                    kernel,
                } => {
                    if shape.len() != 3 {
                        return Err(Error::Network(format!(
                            "layer {i}: conv needs C×H×W input, got {shape:?}"
                        )));
                    }
                    if kernel == 0 || out_channels == 0 || kernel > shape[1] || kernel > shape[2] {
                        return Err(Error::Network(format!(
                            "layer {i}: {out_channels} filters of {kernel}×{kernel} do not fit {shape:?}"
                        )));
                    }
                    output_shape(&[1, shape[0], shape[1], shape[2]], out_channels, kernel)[1..]
                        .to_vec()
                }
                LayerSpec::BatchNorm | LayerSpec::Relu => shape,
                LayerSpec::Dense { out } => {
                    if out == 0 {
                        return Err(Error::Network(format!("layer {i}: dense with no outputs")));
                    }
                    vec![out]
                }
                LayerSpec::Softmax => {
                    if shape.len() != 1 {
                        return Err(Error::Network(format!(
                            "layer {i}: softmax needs a flat input, got {shape:?}"
                        )));
                    }
                    shape
                }
            };
            shapes.push(shape.clone());
        }
        if layers.last() != Some(&LayerSpec::Softmax) {
            return Err(Error::Network("the last layer must be softmax".into()));
        }
        Ok(Self {
            input: input.to_vec(),
            layers,
            shapes,
        })
    }

    /// 28×28×1 → conv 20@5×5 → batch norm → ReLU → dense 10 → softmax.
    pub fn digit_classifier() -> Self {
        Self::new(
            [1, 28, 28],
            vec![
                LayerSpec::Conv {
                    out_channels: 20,
                    kernel: 5,
                },
                LayerSpec::BatchNorm,
                LayerSpec::Relu,
                LayerSpec::Dense { out: 10 },
                LayerSpec::Softmax,
            ],
        )
        .expect("fixed architecture chains")
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    /// Per-sample output shape of each layer.
    pub fn shapes(&self) -> &[Vec<usize>] {
        &self.shapes
    }

    pub fn classes(&self) -> usize {
        self.shapes.last().expect("non-empty")[0]
    }

    fn shape_before(&self, layer: usize) -> &[usize] {
        if layer == 0 {
            &self.input
        } else {
            &self.shapes[layer - 1]
        }
    }

    /// Glorot-uniform weights (`±√(6/(fan_in + fan_out))`), zero biases,
    /// `γ = 1`, `β = 0`, running mean 0 and variance 1.
    pub fn init_params(&self, rng: &mut impl Rng) -> ParamSet {
        let mut params = ParamSet::default();
        for (i, layer) in self.layers.iter().enumerate() {
            let prev = self.shape_before(i);
            let name = |field: &str| format!("{}{i}.{field}", layer.tag());
            match *layer {
                LayerSpec::Conv {
                    out_channels,
                    kernel,
                } => {
                    let fan_in = prev[0] * kernel * kernel;
                    let fan_out = out_channels * kernel * kernel;
                    let shape = [out_channels, prev[0], kernel, kernel];
                    params.push(name("weight"), glorot(&shape, fan_in, fan_out, rng), true);
                    params.push(name("bias"), Tensor::zeros([out_channels]), true);
                }
                LayerSpec::BatchNorm => {
                    let c = prev[0];
                    params.push(name("gamma"), Tensor::full([c], 1.0), true);
                    params.push(name("beta"), Tensor::zeros([c]), true);
                    params.push(name("running_mean"), Tensor::zeros([c]), false);
                    params.push(name("running_var"), Tensor::full([c], 1.0), false);
                    params.push(name("tracked_batches"), Tensor::zeros([1]), false);
                }
                LayerSpec::Dense { out } => {
                    let fan_in: usize = prev.iter().product();
                    let shape = [out, fan_in];
                    params.push(name("weight"), glorot(&shape, fan_in, out, rng), true);
                    params.push(name("bias"), Tensor::zeros([out]), true);
                }
                LayerSpec::Relu | LayerSpec::Softmax => {}
            }
        }
        params
    }

    fn slots(&self) -> Vec<usize> {
        let mut next = 0;
        self.layers
            .iter()
            .map(|l| {
                let start = next;
                next += match l {
                    LayerSpec::Conv { .. } | LayerSpec::Dense { .. } => 2,
                    LayerSpec::BatchNorm => 5,
                    LayerSpec::Relu | LayerSpec::Softmax => 0,
                };
                start
            })
            .collect()
    }

    /// Errors unless `params` has the layout [`init_params`](Self::init_params) produces.
    pub fn check_params(&self, params: &ParamSet) -> Result<()> {
        let mut rng = rand::rngs::mock::StepRng::new(0, 0);
        self.init_params(&mut rng).check_congruent(params)
    }

    fn check_batch(&self, batch: &Tensor) -> Result<()> {
        let mut expected = vec![batch.shape().first().copied().unwrap_or(0)];
        expected.extend_from_slice(&self.input);
        if batch.shape() != expected.as_slice() || expected[0] == 0 {
            return Err(Error::shape(&expected, batch.shape()));
        }
        Ok(())
    }
}

fn glorot(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let len = shape.iter().product();
    let data = (0..len).map(|_| rng.gen_range(-limit..=limit)).collect();
    Tensor::from_vec(shape.to_vec(), data).expect("shape matches length")
}

#[derive(Debug, Clone)]
enum LayerCache {
    Conv { input: Tensor },
    BatchNorm(BatchNormCache),
    Relu { input: Tensor },
    Dense { input: Tensor },
    Softmax { output: Tensor },
}

/// Per-layer values saved by [`forward`] for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    layers: Vec<LayerCache>,
}

impl NetworkSpec {
    /// Batched forward pass over `N × C × H × W` input. Never mutates the
    /// parameters; in [`Mode::Train`] batch norm uses batch statistics.
    pub fn forward(
        &self,
        params: &ParamSet,
        batch: &Tensor,
        mode: Mode,
    ) -> Result<(Tensor, ForwardCache)> {
        self.check_batch(batch)?;
        let slots = self.slots();
        let mut x = batch.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let p = slots[i];
            let (y, cache) = match layer {
                LayerSpec::Conv { .. } => (
                    conv_forward(&x, params.tensor(p), params.tensor(p + 1))?,
                    LayerCache::Conv { input: x },
                ),
                LayerSpec::BatchNorm => {
                    let bn_mode = match mode {
                        Mode::Train => BnMode::Train,
                        Mode::Infer => {
                            if params.tensor(p + 4).data()[0] == 0.0 {
                                return Err(Error::NoRunningStats(format!("bn{i}")));
                            }
                            BnMode::Infer
                        }
                    };
                    let running = RunningStats {
                        mean: params.tensor(p + 2),
                        var: params.tensor(p + 3),
                    };
                    let (y, c) = batchnorm_forward(
                        &x,
                        params.tensor(p),
                        params.tensor(p + 1),
                        Some(running),
                        bn_mode,
                    )?;
                    (y, LayerCache::BatchNorm(c))
                }
                LayerSpec::Relu => (relu_forward(&x), LayerCache::Relu { input: x }),
                LayerSpec::Dense { .. } => (
                    dense_forward(&x, params.tensor(p), params.tensor(p + 1))?,
                    LayerCache::Dense { input: x },
                ),
                LayerSpec::Softmax => {
                    let y = softmax_forward(&x)?;
                    (y.clone(), LayerCache::Softmax { output: y })
                }
            };
            caches.push(cache);
            x = y;
        }
        Ok((x, ForwardCache { layers: caches }))
    }

    /// Training-mode forward pass that also folds the batch statistics into
    /// every batch-norm layer's running averages.
    pub fn forward_train(
        &self,
        params: &mut ParamSet,
        batch: &Tensor,
    ) -> Result<(Tensor, ForwardCache)> {
        let (y, cache) = self.forward(params, batch, Mode::Train)?;
        let slots = self.slots();
        for (i, c) in cache.layers.iter().enumerate() {
            if let LayerCache::BatchNorm(bn) = c {
                let p = slots[i];
                let mut mean = params.tensor(p + 2).clone();
                let mut var = params.tensor(p + 3).clone();
                bn.update_running(&mut mean, &mut var);
                *params.tensor_mut(p + 2) = mean;
                *params.tensor_mut(p + 3) = var;
                params.tensor_mut(p + 4).data_mut()[0] += 1.0;
            }
        }
        Ok((y, cache))
    }

    /// Whether every batch-norm layer has seen at least one training batch.
    pub fn has_running_stats(&self, params: &ParamSet) -> bool {
        let slots = self.slots();
        self.layers
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == LayerSpec::BatchNorm)
            .all(|(i, _)| params.tensor(slots[i] + 4).data()[0] > 0.0)
    }

    /// Back-propagates `grad_y` (`N × K`, the loss gradient with respect to
    /// the softmax output) and returns a gradient for every parameter.
    pub fn backward(
        &self,
        params: &ParamSet,
        cache: &ForwardCache,
        grad_y: &Tensor,
    ) -> Result<ParamSet> {
        if cache.layers.len() != self.layers.len() {
            return Err(Error::Network("cache does not belong to this network".into()));
        }
        let slots = self.slots();
        let mut grads = params.zeros_like();
        let mut g = grad_y.clone();
        for (i, c) in cache.layers.iter().enumerate().rev() {
            let p = slots[i];
            g = match c {
                LayerCache::Conv { input } => {
                    let r = conv_backward(&g, input, params.tensor(p), i > 0)?;
                    *grads.tensor_mut(p) = r.weights;
                    *grads.tensor_mut(p + 1) = r.biases;
                    r.input.unwrap_or_else(|| Tensor::zeros(input.shape().to_vec()))
                }
                LayerCache::BatchNorm(bn) => {
                    let r = batchnorm_backward(&g, bn, params.tensor(p))?;
                    *grads.tensor_mut(p) = r.gamma;
                    *grads.tensor_mut(p + 1) = r.beta;
                    r.input
                }
                LayerCache::Relu { input } => relu_backward(&g.reshape(input.shape().to_vec())?, input)?,
                LayerCache::Dense { input } => {
                    let r = dense_backward(&g, input, params.tensor(p))?;
                    *grads.tensor_mut(p) = r.weights;
                    *grads.tensor_mut(p + 1) = r.biases;
                    r.input
                }
                LayerCache::Softmax { output } => softmax_backward(&g, output)?,
            };
        }
        Ok(grads)
    }

    /// Inference-mode class probabilities.
    pub fn predict(&self, params: &ParamSet, batch: &Tensor) -> Result<Tensor> {
        Ok(self.forward(params, batch, Mode::Infer)?.0)
    }
}
