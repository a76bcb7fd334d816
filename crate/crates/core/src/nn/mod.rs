//! Hand-written layer stack: convolution, batch normalization, ReLU, dense
//! and softmax, each with an exact backward pass.

pub mod activation;
pub mod batchnorm;
pub mod checkpoint;
pub mod conv;
pub mod dense;
pub mod network;
mod params;

pub use batchnorm::BnMode;
pub use network::{ForwardCache, LayerSpec, Mode, NetworkSpec};
pub use params::{Param, ParamSet};
