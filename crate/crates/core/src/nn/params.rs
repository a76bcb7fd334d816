use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// A named tensor. Non-trainable entries (batch-norm running statistics)
/// travel with the checkpoint but are skipped by the optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: Tensor,
    pub trainable: bool,
}

/// Ordered collection of every parameter of a network. Gradients use the
/// same layout, with zeros in the non-trainable slots.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet {
    params: Vec<Param>,
}

impl ParamSet {
    pub fn new(params: Vec<Param>) -> Self {
        Self { params }
    }

    pub fn push(&mut self, name: impl Into<String>, value: Tensor, trainable: bool) -> usize {
        self.params.push(Param {
            name: name.into(),
            value,
            trainable,
        });
        self.params.len() - 1
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Param> {
        self.params.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Param> {
        self.params.iter_mut()
    }

    pub fn tensor(&self, idx: usize) -> &Tensor {
        &self.params[idx].value
    }

    pub fn tensor_mut(&mut self, idx: usize) -> &mut Tensor {
        &mut self.params[idx].value
    }

    pub fn get(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn into_params(self) -> Vec<Param> {
        self.params
    }

    /// Same names and shapes, all zeros.
    pub fn zeros_like(&self) -> Self {
        Self {
            params: self
                .params
                .iter()
                .map(|p| Param {
                    name: p.name.clone(),
                    value: Tensor::zeros(p.value.shape().to_vec()),
                    trainable: p.trainable,
                })
                .collect(),
        }
    }

    /// Errors unless `other` has the same names and shapes in the same order.
    pub fn check_congruent(&self, other: &ParamSet) -> Result<()> {
        if self.params.len() != other.params.len() {
            return Err(Error::InvalidArgument(format!(
                "parameter count mismatch: {} vs {}",
                self.params.len(),
                other.params.len()
            )));
        }
        for (a, b) in self.params.iter().zip(&other.params) {
            if a.name != b.name {
                return Err(Error::InvalidArgument(format!(
                    "parameter `{}` paired with `{}`",
                    a.name, b.name
                )));
            }
            b.value.expect_shape(a.value.shape())?;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.value.is_finite())
    }
}
