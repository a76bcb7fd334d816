use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub fn relu_forward(input: &Tensor) -> Tensor {
    let data = input.data().iter().map(|&v| v.max(0.0)).collect();
    Tensor::from_vec(input.shape().to_vec(), data).expect("same shape")
}

/// Passes the gradient where the cached input was positive.
pub fn relu_backward(grad_out: &Tensor, input: &Tensor) -> Result<Tensor> {
    grad_out.expect_shape(input.shape())?;
    let data = grad_out
        .data()
        .iter()
        .zip(input.data())
        .map(|(&g, &x)| if x > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::from_vec(input.shape().to_vec(), data)
}

fn rows(t: &Tensor) -> Result<usize> {
    match t.shape() {
        &[_, k] => Ok(k),
        s => Err(Error::InvalidArgument(format!("softmax expects N×K, got {s:?}"))),
    }
}

/// Row-wise softmax, stabilized by subtracting each row's maximum.
pub fn softmax_forward(input: &Tensor) -> Result<Tensor> {
    let k = rows(input)?;
    let mut out = input.clone();
    for row in out.data_mut().chunks_mut(k) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    debug_assert!(out.is_finite());
    Ok(out)
}

/// `dx_i = y_i·(g_i − Σ_j g_j·y_j)` with `y` the cached softmax output.
pub fn softmax_backward(grad_out: &Tensor, output: &Tensor) -> Result<Tensor> {
    let k = rows(output)?;
    grad_out.expect_shape(output.shape())?;
    let mut dx = Tensor::zeros(output.shape().to_vec());
    for ((d, g), y) in dx
        .data_mut()
        .chunks_mut(k)
        .zip(grad_out.data().chunks(k))
        .zip(output.data().chunks(k))
    {
        let dot: f64 = g.iter().zip(y).map(|(a, b)| a * b).sum();
        for ((dv, gv), yv) in d.iter_mut().zip(g).zip(y) {
            *dv = yv * (gv - dot);
        }
    }
    Ok(dx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_softmax() {
        let y = softmax_forward(&Tensor::zeros([1, 10])).unwrap();
        assert!(y.data().iter().all(|&v| (v - 0.1).abs() < 1e-15));
        assert!((y.data().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_survives_large_logits() {
        let x = Tensor::from_vec([1, 3], vec![1000.0, 999.0, -1000.0]).unwrap();
        let y = softmax_forward(&x).unwrap();
        assert!(y.is_finite());
        assert!((y.data().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relu_gates_by_sign() {
        let x = Tensor::from_vec([1, 4], vec![-1.0, 0.0, 0.5, 2.0]).unwrap();
        let g = Tensor::from_vec([1, 4], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(relu_forward(&x).data(), &[0.0, 0.0, 0.5, 2.0]);
        assert_eq!(relu_backward(&g, &x).unwrap().data(), &[0.0, 0.0, 3.0, 4.0]);
    }
}
