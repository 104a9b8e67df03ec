use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::layers::{validate_chain, Init, LayerParams, LayerSpec};
use crate::error::{Error, Result};
use crate::secure_conv::ConvSpec;

/// How the network's output is scored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputKind {
    /// Softmax output with cross-entropy; the logit gradient is `P - Y`.
    SoftmaxCrossEntropy,
    /// Sigmoid output with `½ Σ (ŷ - y)²`.
    SigmoidMse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<LayerSpec>,
    pub params: Vec<Option<LayerParams>>,
}

/// Activations recorded by a forward pass starting at layer `start`:
/// `activations[k]` is the input of layer `start + k`, the last entry is the
/// network output.
#[derive(Clone, Debug)]
pub struct Cache {
    pub start: usize,
    pub activations: Vec<Array2<f64>>,
}

impl Cache {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("cache holds the input")
    }

    /// Output of layer `layer`.
    pub fn after(&self, layer: usize) -> &Array2<f64> {
        &self.activations[layer + 1 - self.start]
    }
}

/// Parameter gradients, aligned with [`Network::params`].
pub type Grads = Vec<Option<LayerParams>>;

impl Network {
    pub fn new(layers: Vec<LayerSpec>, init: Init, seed: u64) -> Result<Self> {
        validate_chain(&layers)?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let params = layers.iter().map(|l| l.init_params(init, &mut rng)).collect();
        Ok(Network { layers, params })
    }

    pub fn from_parts(layers: Vec<LayerSpec>, params: Vec<Option<LayerParams>>) -> Result<Self> {
        validate_chain(&layers)?;
        if params.len() != layers.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} parameter slots for {} layers",
                params.len(),
                layers.len()
            )));
        }
        let net = Network { layers, params };
        // a zero-column probe exercises every shape check
        let probe = Array2::zeros((net.input_len(), 0));
        net.forward(&probe)?;
        Ok(net)
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].fixed_input().expect("validated")
    }

    pub fn output_len(&self) -> usize {
        *validate_chain(&self.layers)
            .expect("validated")
            .last()
            .expect("non-empty")
    }

    pub fn output_kind(&self) -> Result<OutputKind> {
        match self.layers.last() {
            Some(LayerSpec::Softmax) => Ok(OutputKind::SoftmaxCrossEntropy),
            Some(LayerSpec::Sigmoid) => Ok(OutputKind::SigmoidMse),
            other => Err(Error::InvalidParams(format!(
                "output layer must be softmax or sigmoid, got {other:?}"
            ))),
        }
    }

    pub fn forward(&self, input: &Array2<f64>) -> Result<Cache> {
        self.forward_range(0, input)
    }

    /// Runs layers `start..` on `input`, the input of layer `start`.
    pub fn forward_range(&self, start: usize, input: &Array2<f64>) -> Result<Cache> {
        let mut activations = vec![input.clone()];
        for i in start..self.layers.len() {
            let next = self.layers[i].forward(self.params[i].as_ref(), activations.last().expect("non-empty"))?;
            activations.push(next);
        }
        Ok(Cache { start, activations })
    }

    /// Backpropagates `grad`, the gradient w.r.t. the output of layer
    /// `end - 1`, through layers `end - 1` down to `start`. Returns the
    /// parameter gradients (full length, `None` outside the range) and the
    /// gradient w.r.t. the input of layer `start`.
    pub fn backward_range(
        &self,
        cache: &Cache,
        start: usize,
        end: usize,
        grad: Array2<f64>,
    ) -> Result<(Grads, Array2<f64>)> {
        if start < cache.start || end > self.layers.len() || start > end {
            return Err(Error::ShapeMismatch(format!(
                "backward over {start}..{end} with a cache from layer {}",
                cache.start
            )));
        }
        let mut grads: Grads = vec![None; self.layers.len()];
        let mut g = grad;
        for i in (start..end).rev() {
            let x = &cache.activations[i - cache.start];
            let y = &cache.activations[i + 1 - cache.start];
            let (pg, dx) = self.layers[i].backward(self.params[i].as_ref(), x, y, &g)?;
            grads[i] = pg;
            g = dx;
        }
        Ok((grads, g))
    }

    /// Gradients of the summed batch loss for plaintext training.
    pub fn gradients(&self, input: &Array2<f64>, labels: &Array2<f64>) -> Result<(f64, Grads)> {
        let cache = self.forward(input)?;
        let out = cache.output();
        let n = self.layers.len();
        let (loss, grad, end) = match self.output_kind()? {
            OutputKind::SoftmaxCrossEntropy => (super::loss_softmax_ce(out, labels)?, out - labels, n - 1),
            OutputKind::SigmoidMse => (super::loss_mse(out, labels)?, out - labels, n),
        };
        let (grads, _) = self.backward_range(&cache, 0, end, grad)?;
        Ok((loss, grads))
    }

    pub fn parameter_count(&self) -> usize {
        self.params
            .iter()
            .flatten()
            .map(|p| p.weights.len() + p.bias.len())
            .sum()
    }
}

/// Vanilla SGD: `W ← W - lr · G`.
pub fn sgd_update(params: &mut [Option<LayerParams>], grads: &[Option<LayerParams>], lr: f64) -> Result<()> {
    if params.len() != grads.len() {
        return Err(Error::ShapeMismatch("gradient list length".into()));
    }
    for (p, g) in params.iter_mut().zip(grads) {
        match (p, g) {
            (Some(p), Some(g)) => {
                if p.weights.dim() != g.weights.dim() || p.bias.len() != g.bias.len() {
                    return Err(Error::ShapeMismatch("gradient shape".into()));
                }
                p.weights.scaled_add(-lr, &g.weights);
                p.bias.scaled_add(-lr, &g.bias);
            }
            (_, None) => {}
            (None, Some(_)) => return Err(Error::ShapeMismatch("gradient for a parameterless layer".into())),
        }
    }
    Ok(())
}

/// Dense layers of the given widths with sigmoid activations and the chosen output head.
pub fn build_mlp(widths: &[usize], output: OutputKind) -> Result<Vec<LayerSpec>> {
    if widths.len() < 2 {
        return Err(Error::InvalidParams(
            "an MLP needs at least input and output widths".into(),
        ));
    }
    let mut layers = Vec::new();
    for (i, pair) in widths.windows(2).enumerate() {
        layers.push(LayerSpec::Dense {
            inputs: pair[0],
            outputs: pair[1],
        });
        let last = i + 2 == widths.len();
        layers.push(match (last, output) {
            (true, OutputKind::SoftmaxCrossEntropy) => LayerSpec::Softmax,
            _ => LayerSpec::Sigmoid,
        });
    }
    Ok(layers)
}

/// LeNet-5 for `28 × 28 × 1` inputs with sigmoid activations and average pooling.
pub fn build_lenet5() -> Vec<LayerSpec> {
    let c1 = ConvSpec::new([28, 28, 1], 5, 2, 1, 6).expect("C1 geometry");
    let c3 = ConvSpec::new([14, 14, 6], 5, 0, 1, 16).expect("C3 geometry");
    vec![
        LayerSpec::Conv(c1),
        LayerSpec::Sigmoid,
        LayerSpec::AvgPool {
            input: [28, 28, 6],
            size: 2,
        },
        LayerSpec::Conv(c3),
        LayerSpec::Sigmoid,
        LayerSpec::AvgPool {
            input: [10, 10, 16],
            size: 2,
        },
        LayerSpec::Flatten,
        LayerSpec::Dense {
            inputs: 400,
            outputs: 120,
        },
        LayerSpec::Sigmoid,
        LayerSpec::Dense {
            inputs: 120,
            outputs: 84,
        },
        LayerSpec::Sigmoid,
        LayerSpec::Dense {
            inputs: 84,
            outputs: 10,
        },
        LayerSpec::Softmax,
    ]
}
