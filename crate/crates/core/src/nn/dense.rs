use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// `(N, features)` view of a batch with any trailing shape.
fn flat(input: &Tensor) -> (usize, usize) {
    let n = input.shape()[0];
    (n, input.len() / n)
}

/// `y = x·Wᵀ + b` with `W: out × in`; trailing input dims are flattened.
pub fn dense_forward(input: &Tensor, weights: &Tensor, biases: &Tensor) -> Result<Tensor> {
    let (n, f) = flat(input);
    let &[o, wf] = weights.shape() else {
        return Err(Error::InvalidArgument("dense weights must be out×in".into()));
    };
    if wf != f {
        return Err(Error::shape(&[o, f], weights.shape()));
    }
    biases.expect_shape(&[o])?;
    let mut out = Tensor::zeros([n, o]);
    for (row, x) in out.data_mut().chunks_mut(o).zip(input.data().chunks(f)) {
        for ((y, w), b) in row.iter_mut().zip(weights.data().chunks(f)).zip(biases.data()) {
            *y = b + w.iter().zip(x).map(|(a, c)| a * c).sum::<f64>();
        }
    }
    debug_assert!(out.is_finite());
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct DenseGrads {
    pub input: Tensor,
    pub weights: Tensor,
    pub biases: Tensor,
}

pub fn dense_backward(grad_out: &Tensor, input: &Tensor, weights: &Tensor) -> Result<DenseGrads> {
    let (n, f) = flat(input);
    let o = weights.shape()[0];
    grad_out.expect_shape(&[n, o])?;
    let mut gw = Tensor::zeros(weights.shape().to_vec());
    let mut gb = Tensor::zeros([o]);
    let mut gin = Tensor::zeros(input.shape().to_vec());
    for ((g, x), gi) in grad_out
        .data()
        .chunks(o)
        .zip(input.data().chunks(f))
        .zip(gin.data_mut().chunks_mut(f))
    {
        for (k, &gk) in g.iter().enumerate() {
            gb.data_mut()[k] += gk;
            let wrow = &weights.data()[k * f..][..f];
            let gwrow = &mut gw.data_mut()[k * f..][..f];
            for ((gwv, xv), (giv, wv)) in gwrow.iter_mut().zip(x).zip(gi.iter_mut().zip(wrow)) {
                *gwv += gk * xv;
                *giv += gk * wv;
            }
        }
    }
    Ok(DenseGrads {
        input: gin,
        weights: gw,
        biases: gb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_product() {
        let x = Tensor::from_vec([1, 3], vec![1.0, 2.0, 3.0]).unwrap();
        let w = Tensor::from_vec([2, 3], vec![1.0, 0.0, -1.0, 0.5, 0.5, 0.5]).unwrap();
        let b = Tensor::from_vec([2], vec![0.1, -0.1]).unwrap();
        let y = dense_forward(&x, &w, &b).unwrap();
        assert_eq!(y.data(), &[-1.9, 2.9]);
        assert!(dense_forward(&x, &Tensor::zeros([2, 4]), &b).is_err());
    }

    #[test]
    fn flattens_trailing_dims() {
        let x = Tensor::full([2, 2, 3, 1], 1.0);
        let w = Tensor::full([4, 6], 0.5);
        let y = dense_forward(&x, &w, &Tensor::zeros([4])).unwrap();
        assert_eq!(y.shape(), &[2, 4]);
        assert!(y.data().iter().all(|&v| v == 3.0));
    }
}
