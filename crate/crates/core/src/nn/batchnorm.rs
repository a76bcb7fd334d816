//! Per-channel batch normalization over `N × C × …`, statistics taken over
//! the batch and all trailing (spatial) dimensions.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const BN_EPS: f64 = 1e-5;
/// Weight of the newest batch in the running-statistics moving average.
pub const BN_MOMENTUM: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnMode {
    /// Normalize with the batch's own statistics.
    Train,
    /// Normalize with the running statistics.
    Infer,
}

#[derive(Debug, Clone, Copy)]
pub struct RunningStats<'a> {
    pub mean: &'a Tensor,
    pub var: &'a Tensor,
}

#[derive(Debug, Clone)]
pub struct BatchNormCache {
    mode: BnMode,
    xhat: Tensor,
    inv_std: Vec<f64>,
    batch_mean: Vec<f64>,
    batch_var: Vec<f64>,
}

impl BatchNormCache {
    pub fn batch_mean(&self) -> &[f64] {
        &self.batch_mean
    }

    pub fn batch_var(&self) -> &[f64] {
        &self.batch_var
    }

    /// Folds this batch's statistics into the running averages.
    pub fn update_running(&self, mean: &mut Tensor, var: &mut Tensor) {
        for (r, b) in mean.data_mut().iter_mut().zip(&self.batch_mean) {
            *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * b;
        }
        for (r, b) in var.data_mut().iter_mut().zip(&self.batch_var) {
            *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * b;
        }
    }
}

fn layout(input: &Tensor) -> Result<(usize, usize, usize)> {
    let shape = input.shape();
    if shape.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "batch norm input must be N×C×…, got {shape:?}"
        )));
    }
    Ok((shape[0], shape[1], shape[2..].iter().product()))
}

pub fn batchnorm_forward(
    input: &Tensor,
    gamma: &Tensor,
    beta: &Tensor,
    running: Option<RunningStats<'_>>,
    mode: BnMode,
) -> Result<(Tensor, BatchNormCache)> {
    let (n, c, s) = layout(input)?;
    gamma.expect_shape(&[c])?;
    beta.expect_shape(&[c])?;
    let x = input.data();
    let count = (n * s) as f64;
    let channel = |ch: usize| (0..n).flat_map(move |b| x[(b * c + ch) * s..][..s].iter());

    let mut batch_mean = vec![0.0; c];
    let mut batch_var = vec![0.0; c];
    for ch in 0..c {
        let mean = channel(ch).sum::<f64>() / count;
        batch_mean[ch] = mean;
        batch_var[ch] = channel(ch).map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
    }
    let (mean, var) = match mode {
        BnMode::Train => (batch_mean.clone(), batch_var.clone()),
        BnMode::Infer => {
            let r = running.ok_or_else(|| Error::NoRunningStats("batch_norm".into()))?;
            r.mean.expect_shape(&[c])?;
            r.var.expect_shape(&[c])?;
            (r.mean.data().to_vec(), r.var.data().to_vec())
        }
    };
    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BN_EPS).sqrt()).collect();

    let mut xhat = Tensor::zeros(input.shape().to_vec());
    let mut out = Tensor::zeros(input.shape().to_vec());
    for b in 0..n {
        for ch in 0..c {
            let off = (b * c + ch) * s;
            let (g, bt, m, is) = (gamma.data()[ch], beta.data()[ch], mean[ch], inv_std[ch]);
            let xs = &x[off..off + s];
            let hs = &mut xhat.data_mut()[off..off + s];
            for (h, &xv) in hs.iter_mut().zip(xs) {
                *h = (xv - m) * is;
            }
            for (o, &h) in out.data_mut()[off..off + s].iter_mut().zip(&xhat.data()[off..off + s]) {
                *o = g * h + bt;
            }
        }
    }
    debug_assert!(out.is_finite());
    Ok((
        out,
        BatchNormCache {
            mode,
            xhat,
            inv_std,
            batch_mean,
            batch_var,
        },
    ))
}

#[derive(Debug, Clone)]
pub struct BatchNormGrads {
    pub input: Tensor,
    pub gamma: Tensor,
    pub beta: Tensor,
}

pub fn batchnorm_backward(
    grad_out: &Tensor,
    cache: &BatchNormCache,
    gamma: &Tensor,
) -> Result<BatchNormGrads> {
    grad_out.expect_shape(cache.xhat.shape())?;
    let (n, c, s) = layout(grad_out)?;
    let g = grad_out.data();
    let xhat = cache.xhat.data();
    let count = (n * s) as f64;

    let mut dgamma = Tensor::zeros([c]);
    let mut dbeta = Tensor::zeros([c]);
    for b in 0..n {
        for ch in 0..c {
            let off = (b * c + ch) * s;
            for i in off..off + s {
                dbeta.data_mut()[ch] += g[i];
                dgamma.data_mut()[ch] += g[i] * xhat[i];
            }
        }
    }

    let mut dx = Tensor::zeros(grad_out.shape().to_vec());
    for b in 0..n {
        for ch in 0..c {
            let off = (b * c + ch) * s;
            let scale = gamma.data()[ch] * cache.inv_std[ch];
            let (sb, sg) = (dbeta.data()[ch], dgamma.data()[ch]);
            for i in off..off + s {
                dx.data_mut()[i] = match cache.mode {
                    BnMode::Train => scale * (g[i] - (sb + xhat[i] * sg) / count),
                    BnMode::Infer => scale * g[i],
                };
            }
        }
    }
    Ok(BatchNormGrads {
        input: dx,
        gamma: dgamma,
        beta: dbeta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(shape: &[usize], seed: u64) -> Tensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = shape.iter().product();
        Tensor::from_vec(shape.to_vec(), (0..len).map(|_| rng.gen_range(-2.0..3.0)).collect())
            .unwrap()
    }

    #[test]
    fn normalizes_each_channel() {
        let x = random(&[2, 3, 4, 4], 9);
        let (y, _) = batchnorm_forward(
            &x,
            &Tensor::full([3], 1.0),
            &Tensor::zeros([3]),
            None,
            BnMode::Train,
        )
        .unwrap();
        for ch in 0..3 {
            let vals: Vec<f64> = (0..2)
                .flat_map(|b| y.data()[(b * 3 + ch) * 16..][..16].to_vec())
                .collect();
            let m = vals.iter().sum::<f64>() / 32.0;
            let v = vals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 32.0;
            assert!(m.abs() < 1e-6);
            // The ε floor shrinks the variance slightly below one.
            assert!((v - 1.0).abs() < 1e-4, "{v}");
        }
    }

    #[test]
    fn constant_channel_maps_to_beta() {
        let x = Tensor::full([2, 1, 3, 3], 4.2);
        let beta = Tensor::full([1], 0.7);
        let (y, _) =
            batchnorm_forward(&x, &Tensor::full([1], 2.0), &beta, None, BnMode::Train).unwrap();
        assert!(y.data().iter().all(|&v| (v - 0.7).abs() < 1e-12));
    }

    #[test]
    fn infer_without_stats_errors() {
        let x = Tensor::zeros([1, 2, 2, 2]);
        let r = batchnorm_forward(
            &x,
            &Tensor::full([2], 1.0),
            &Tensor::zeros([2]),
            None,
            BnMode::Infer,
        );
        assert!(matches!(r, Err(Error::NoRunningStats(_))));
    }

    #[test]
    fn running_average_update() {
        let x = random(&[4, 2, 3, 3], 11);
        let (_, cache) = batchnorm_forward(
            &x,
            &Tensor::full([2], 1.0),
            &Tensor::zeros([2]),
            None,
            BnMode::Train,
        )
        .unwrap();
        let mut mean = Tensor::zeros([2]);
        let mut var = Tensor::full([2], 1.0);
        cache.update_running(&mut mean, &mut var);
        for ch in 0..2 {
            assert!((mean.data()[ch] - 0.1 * cache.batch_mean()[ch]).abs() < 1e-15);
            assert!((var.data()[ch] - (0.9 + 0.1 * cache.batch_var()[ch])).abs() < 1e-15);
        }
    }
}
