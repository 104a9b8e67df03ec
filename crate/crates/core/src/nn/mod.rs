//! Plaintext neural-network engine: dense, convolution and pooling layers,
//! sigmoid/softmax heads, backpropagation and SGD.

mod layers;
mod loss;
mod network;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use layers::{Init, LayerParams, LayerSpec};
pub use loss::{argmax_columns, log_softmax, loss_mse, loss_softmax_ce, one_hot, sigmoid, softmax};
pub use network::{build_lenet5, build_mlp, sgd_update, Cache, Grads, Network, OutputKind};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Stops after this many iterations when set.
    #[serde(default)]
    pub iterations: Option<usize>,
    pub seed: u64,
    #[serde(default)]
    pub init: Init,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            learning_rate: 0.5,
            batch_size: 64,
            epochs: 1,
            iterations: None,
            seed: 42,
            init: Init::Glorot,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParams(format!("learning rate {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParams("batch size must be at least 1".into()));
        }
        Ok(())
    }
}
