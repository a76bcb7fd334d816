//! Valid cross-correlation, stride 1, no padding, over `N × C × H × W`.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Debug, Clone)]
pub struct ConvGrads {
    /// `None` when the caller did not ask for it (first layer).
    pub input: Option<Tensor>,
    pub weights: Tensor,
    pub biases: Tensor,
}

struct Dims {
    n: usize,
    c: usize,
    h: usize,
    w: usize,
    o: usize,
    kh: usize,
    kw: usize,
    oh: usize,
    ow: usize,
}

fn dims(input: &Tensor, weights: &Tensor) -> Result<Dims> {
    let &[n, c, h, w] = input.shape() else {
        return Err(Error::InvalidArgument(format!(
            "conv input must be N×C×H×W, got {:?}",
            input.shape()
        )));
    };
    let &[o, wc, kh, kw] = weights.shape() else {
        return Err(Error::InvalidArgument(format!(
            "conv weights must be O×C×KH×KW, got {:?}",
            weights.shape()
        )));
    };
    if wc != c {
        return Err(Error::shape(&[o, c, kh, kw], weights.shape()));
    }
    if kh > h || kw > w {
        return Err(Error::InvalidArgument(format!(
            "kernel {kh}×{kw} larger than input {h}×{w}"
        )));
    }
    Ok(Dims {
        n,
        c,
        h,
        w,
        o,
        kh,
        kw,
        oh: h - kh + 1,
        ow: w - kw + 1,
    })
}

pub fn output_shape(input: &[usize], out_channels: usize, kernel: usize) -> Vec<usize> {
    vec![
        input[0],
        out_channels,
        input[2] + 1 - kernel,
        input[3] + 1 - kernel,
    ]
}

pub fn conv_forward(input: &Tensor, weights: &Tensor, biases: &Tensor) -> Result<Tensor> {
    let d = dims(input, weights)?;
    biases.expect_shape(&[d.o])?;
    let x = input.data();
    let k = weights.data();
    let mut out = Tensor::zeros([d.n, d.o, d.oh, d.ow]);
    let plane = d.oh * d.ow;
    for (n, sample) in out.data_mut().chunks_mut(d.o * plane).enumerate() {
        for (o, oplane) in sample.chunks_mut(plane).enumerate() {
            oplane.fill(biases.data()[o]);
            for c in 0..d.c {
                let xplane = &x[(n * d.c + c) * d.h * d.w..][..d.h * d.w];
                for ky in 0..d.kh {
                    for kx in 0..d.kw {
                        let wv = k[((o * d.c + c) * d.kh + ky) * d.kw + kx];
                        for oy in 0..d.oh {
                            let xrow = &xplane[(oy + ky) * d.w + kx..][..d.ow];
                            let orow = &mut oplane[oy * d.ow..][..d.ow];
                            for (ov, xv) in orow.iter_mut().zip(xrow) {
                                *ov += wv * xv;
                            }
                        }
                    }
                }
            }
        }
    }
    debug_assert!(out.is_finite());
    Ok(out)
}

pub fn conv_backward(
    grad_out: &Tensor,
    input: &Tensor,
    weights: &Tensor,
    need_input_grad: bool,
) -> Result<ConvGrads> {
    let d = dims(input, weights)?;
    grad_out.expect_shape(&[d.n, d.o, d.oh, d.ow])?;
    let x = input.data();
    let g = grad_out.data();
    let k = weights.data();
    let mut gw = Tensor::zeros(weights.shape().to_vec());
    let mut gb = Tensor::zeros([d.o]);
    let mut gin = need_input_grad.then(|| Tensor::zeros(input.shape().to_vec()));
    let plane = d.oh * d.ow;

    for n in 0..d.n {
        for o in 0..d.o {
            let gplane = &g[(n * d.o + o) * plane..][..plane];
            gb.data_mut()[o] += gplane.iter().sum::<f64>();
            for c in 0..d.c {
                let xoff = (n * d.c + c) * d.h * d.w;
                let xplane = &x[xoff..][..d.h * d.w];
                for ky in 0..d.kh {
                    for kx in 0..d.kw {
                        let widx = ((o * d.c + c) * d.kh + ky) * d.kw + kx;
                        let mut acc = 0.0;
                        for oy in 0..d.oh {
                            let xrow = &xplane[(oy + ky) * d.w + kx..][..d.ow];
                            let grow = &gplane[oy * d.ow..][..d.ow];
                            acc += xrow.iter().zip(grow).map(|(a, b)| a * b).sum::<f64>();
                        }
                        gw.data_mut()[widx] += acc;
                        if let Some(gin) = gin.as_mut() {
                            let wv = k[widx];
                            let gi = &mut gin.data_mut()[xoff..][..d.h * d.w];
                            for oy in 0..d.oh {
                                let irow = &mut gi[(oy + ky) * d.w + kx..][..d.ow];
                                let grow = &gplane[oy * d.ow..][..d.ow];
                                for (iv, gv) in irow.iter_mut().zip(grow) {
                                    *iv += wv * gv;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(ConvGrads {
        input: gin,
        weights: gw,
        biases: gb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
        let len = shape.iter().product();
        Tensor::from_vec(shape.to_vec(), (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .unwrap()
    }

    /// Six nested loops straight from the definition.
    fn naive(input: &Tensor, weights: &Tensor, biases: &Tensor) -> Vec<f64> {
        let [n, c, h, w] = input.shape().try_into().unwrap();
        let [o, _, kh, kw] = weights.shape().try_into().unwrap();
        let (oh, ow) = (h - kh + 1, w - kw + 1);
        let mut out = vec![0.0; n * o * oh * ow];
        for b in 0..n {
            for f in 0..o {
                for y in 0..oh {
                    for x in 0..ow {
                        let mut s = biases.data()[f];
                        for ch in 0..c {
                            for i in 0..kh {
                                for j in 0..kw {
                                    s += input.data()[((b * c + ch) * h + y + i) * w + x + j]
                                        * weights.data()[((f * c + ch) * kh + i) * kw + j];
                                }
                            }
                        }
                        out[((b * o + f) * oh + y) * ow + x] = s;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn zero_input_zero_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = random(&[20, 1, 5, 5], &mut rng);
        let out = conv_forward(&Tensor::zeros([1, 1, 28, 28]), &w, &Tensor::zeros([20])).unwrap();
        assert_eq!(out.shape(), &[1, 20, 24, 24]);
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn filter_against_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = random(&[1, 1, 5, 5], &mut rng);
        let x = w.clone();
        let b = Tensor::full([1], 0.3);
        let out = conv_forward(&x, &w, &b).unwrap();
        let expect: f64 = w.data().iter().map(|v| v * v).sum::<f64>() + 0.3;
        assert_eq!(out.shape(), &[1, 1, 1, 1]);
        assert!((out.data()[0] - expect).abs() < 1e-14);
    }

    #[test]
    fn matches_naive_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random(&[2, 3, 9, 8], &mut rng);
        let w = random(&[4, 3, 3, 2], &mut rng);
        let b = random(&[4], &mut rng);
        let fast = conv_forward(&x, &w, &b).unwrap();
        for (a, e) in fast.data().iter().zip(naive(&x, &w, &b)) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_grad_out_gives_zero_grads() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random(&[1, 1, 6, 6], &mut rng);
        let w = random(&[2, 1, 3, 3], &mut rng);
        let g = conv_backward(&Tensor::zeros([1, 2, 4, 4]), &x, &w, true).unwrap();
        assert!(g.weights.data().iter().all(|&v| v == 0.0));
        assert!(g.biases.data().iter().all(|&v| v == 0.0));
        assert!(g.input.unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shape_errors() {
        let x = Tensor::zeros([1, 2, 6, 6]);
        let w = Tensor::zeros([2, 1, 3, 3]);
        assert!(conv_forward(&x, &w, &Tensor::zeros([2])).is_err());
        let w = Tensor::zeros([2, 2, 3, 3]);
        assert!(conv_forward(&x, &w, &Tensor::zeros([3])).is_err());
        assert!(conv_backward(&Tensor::zeros([1, 2, 3, 3]), &x, &w, false).is_err());
    }
}
