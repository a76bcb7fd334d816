use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("value {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    Shape {
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid network: {0}")]
    Network(String),

    #[error("batch norm layer `{0}` has no running statistics yet")]
    NoRunningStats(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("truncated input: needed {needed} bytes, only {available} available")]
    Length { needed: usize, available: usize },

    #[error("image/label count mismatch: {images} images vs {labels} labels")]
    Pairing { images: usize, labels: usize },

    #[error("non-finite loss in fold {fold}, epoch {epoch}, batch {batch}")]
    NonFiniteLoss {
        fold: usize,
        epoch: usize,
        batch: usize,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn shape(expected: &[usize], actual: &[usize]) -> Self {
        Error::Shape {
            expected: expected.to_vec(),
            actual: actual.to_vec(),
        }
    }
}
