//! Layer kinds and their forward/backward passes.
//!
//! Activations are `features × batch`. Image tensors are flattened
//! height-major, channel-minor, so a convolution's output column is the
//! `out_h × out_w × filters` map in the same order the secure convolution
//! produces it.

use ndarray::{s, Array1, Array2, Axis};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::{sigmoid, softmax};
use crate::error::{Error, Result};
use crate::secure_conv::{extract_windows, ConvSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LayerSpec {
    Dense {
        inputs: usize,
        outputs: usize,
    },
    Conv(ConvSpec),
    /// Non-overlapping `size × size` average pooling over an `h × w × c` input.
    AvgPool {
        input: [usize; 3],
        size: usize,
    },
    Sigmoid,
    Relu,
    Flatten,
    Softmax,
}

/// Weights and bias of one parametric layer. Dense weights are
/// `outputs × inputs`; convolution weights are `filters × window_len`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    shape: [usize; 2],
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Serialize for LayerParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ParamsRepr {
            shape: [self.weights.nrows(), self.weights.ncols()],
            weights: self.weights.iter().copied().collect(),
            bias: self.bias.to_vec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LayerParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = ParamsRepr::deserialize(d)?;
        let weights = Array2::from_shape_vec((r.shape[0], r.shape[1]), r.weights).map_err(D::Error::custom)?;
        if r.bias.len() != r.shape[0] {
            return Err(D::Error::custom("bias length differs from weight rows"));
        }
        if weights.iter().chain(&r.bias).any(|v| !v.is_finite()) {
            return Err(D::Error::custom("non-finite parameter"));
        }
        Ok(LayerParams {
            weights,
            bias: Array1::from(r.bias),
        })
    }
}

impl LayerParams {
    pub fn zeros_like(&self) -> Self {
        LayerParams {
            weights: Array2::zeros(self.weights.dim()),
            bias: Array1::zeros(self.bias.len()),
        }
    }

    pub fn scale(&mut self, k: f64) {
        self.weights *= k;
        self.bias *= k;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// Uniform in `±sqrt(6 / (fan_in + fan_out))`.
    #[default]
    Glorot,
    /// Uniform in `±0.5 / sqrt(fan_in)`.
    ScaledUniform,
}

impl LayerSpec {
    pub fn has_params(&self) -> bool {
        matches!(self, LayerSpec::Dense { .. } | LayerSpec::Conv(_))
    }

    /// Input length fixed by the layer itself, if any.
    pub fn fixed_input(&self) -> Option<usize> {
        match self {
            LayerSpec::Dense { inputs, .. } => Some(*inputs),
            LayerSpec::Conv(spec) => Some(spec.input_len()),
            LayerSpec::AvgPool { input, .. } => Some(input.iter().product()),
            _ => None,
        }
    }

    pub fn output_len(&self, input_len: usize) -> Result<usize> {
        if let Some(n) = self.fixed_input() {
            if n != input_len {
                return Err(Error::ShapeMismatch(format!(
                    "{self:?} expects {n} inputs, previous layer yields {input_len}"
                )));
            }
        }
        Ok(match self {
            LayerSpec::Dense { outputs, .. } => *outputs,
            LayerSpec::Conv(spec) => spec.positions() * spec.filters,
            LayerSpec::AvgPool { input, size } => (input[0] / size) * (input[1] / size) * input[2],
            _ => input_len,
        })
    }

    fn validate(&self) -> Result<()> {
        match self {
            LayerSpec::Dense { inputs, outputs } if *inputs == 0 || *outputs == 0 => {
                Err(Error::InvalidParams("dense layer with zero width".into()))
            }
            LayerSpec::AvgPool { input, size }
                if *size == 0 || input[0] % size != 0 || input[1] % size != 0 || input[2] == 0 =>
            {
                Err(Error::InvalidParams(format!(
                    "pool size {size} does not tile {input:?}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn init_params<R: Rng + ?Sized>(&self, init: Init, rng: &mut R) -> Option<LayerParams> {
        let (rows, cols, fan_in, fan_out) = match self {
            LayerSpec::Dense { inputs, outputs } => (*outputs, *inputs, *inputs, *outputs),
            LayerSpec::Conv(spec) => {
                let wl = spec.window_len();
                (spec.filters, wl, wl, spec.filters * spec.size * spec.size)
            }
            _ => return None,
        };
        let limit = match init {
            Init::Glorot => (6.0 / (fan_in + fan_out) as f64).sqrt(),
            Init::ScaledUniform => 0.5 / (fan_in as f64).sqrt(),
        };
        let weights = Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-limit..=limit));
        Some(LayerParams {
            weights,
            bias: Array1::zeros(rows),
        })
    }

    fn check_params<'a>(&self, p: Option<&'a LayerParams>) -> Result<Option<&'a LayerParams>> {
        let expected = match self {
            LayerSpec::Dense { inputs, outputs } => Some((*outputs, *inputs)),
            LayerSpec::Conv(spec) => Some((spec.filters, spec.window_len())),
            _ => None,
        };
        match (expected, p) {
            (None, _) => Ok(None),
            (Some(dim), Some(p)) if p.weights.dim() == dim && p.bias.len() == dim.0 => Ok(Some(p)),
            (Some(dim), _) => Err(Error::ShapeMismatch(format!("{self:?} needs {dim:?} weights"))),
        }
    }

    pub fn forward(&self, p: Option<&LayerParams>, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.output_len(x.nrows())?;
        let p = self.check_params(p)?;
        Ok(match self {
            LayerSpec::Dense { .. } => {
                let p = p.expect("checked");
                p.weights.dot(x) + p.bias.view().insert_axis(Axis(1))
            }
            LayerSpec::Conv(spec) => conv_forward(spec, p.expect("checked"), x)?,
            LayerSpec::AvgPool { input, size } => pool_forward(*input, *size, x),
            LayerSpec::Sigmoid => x.mapv(sigmoid),
            LayerSpec::Relu => x.mapv(|v| v.max(0.0)),
            LayerSpec::Flatten => x.clone(),
            LayerSpec::Softmax => softmax(x),
        })
    }

    /// Given the layer's input `x`, output `y` and `dy = ∂E/∂y`, returns the
    /// parameter gradient (if any) and `∂E/∂x`.
    pub fn backward(
        &self,
        p: Option<&LayerParams>,
        x: &Array2<f64>,
        y: &Array2<f64>,
        dy: &Array2<f64>,
    ) -> Result<(Option<LayerParams>, Array2<f64>)> {
        if dy.dim() != y.dim() {
            return Err(Error::ShapeMismatch(format!(
                "gradient {:?} for output {:?}",
                dy.dim(),
                y.dim()
            )));
        }
        let p = self.check_params(p)?;
        Ok(match self {
            LayerSpec::Dense { .. } => {
                let p = p.expect("checked");
                let grads = LayerParams {
                    weights: dy.dot(&x.t()),
                    bias: dy.sum_axis(Axis(1)),
                };
                (Some(grads), p.weights.t().dot(dy))
            }
            LayerSpec::Conv(spec) => {
                let (g, dx) = conv_backward(spec, p.expect("checked"), x, dy)?;
                (Some(g), dx)
            }
            LayerSpec::AvgPool { input, size } => (None, pool_backward(*input, *size, dy)),
            LayerSpec::Sigmoid => (None, dy * &y.mapv(|a| a * (1.0 - a))),
            LayerSpec::Relu => (None, dy * &x.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 })),
            LayerSpec::Flatten => (None, dy.clone()),
            LayerSpec::Softmax => {
                let mut dx = Array2::zeros(y.dim());
                for ((mut out, pc), gc) in dx
                    .axis_iter_mut(Axis(1))
                    .zip(y.axis_iter(Axis(1)))
                    .zip(dy.axis_iter(Axis(1)))
                {
                    let dotp = pc.dot(&gc);
                    for ((o, &pi), &gi) in out.iter_mut().zip(pc).zip(gc) {
                        *o = pi * (gi - dotp);
                    }
                }
                (None, dx)
            }
        })
    }
}

pub(crate) fn validate_chain(layers: &[LayerSpec]) -> Result<Vec<usize>> {
    let first = layers
        .first()
        .and_then(LayerSpec::fixed_input)
        .ok_or_else(|| Error::InvalidParams("the first layer must be dense or convolutional".into()))?;
    let mut sizes = vec![first];
    for l in layers {
        l.validate()?;
        let next = l.output_len(*sizes.last().expect("non-empty"))?;
        sizes.push(next);
    }
    Ok(sizes)
}

/// Window matrix (`positions × window_len`) of every column of `x`.
fn column_windows(spec: &ConvSpec, x: &Array2<f64>) -> Result<Vec<Array2<f64>>> {
    (0..x.ncols())
        .into_par_iter()
        .map(|j| {
            let col: Vec<f64> = x.column(j).to_vec();
            let rows = extract_windows(spec, &col)?;
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            Ok(Array2::from_shape_vec((spec.positions(), spec.window_len()), flat).expect("window shape"))
        })
        .collect()
}

fn conv_forward(spec: &ConvSpec, p: &LayerParams, x: &Array2<f64>) -> Result<Array2<f64>> {
    let windows = column_windows(spec, x)?;
    let mut out = Array2::zeros((spec.positions() * spec.filters, x.ncols()));
    let cols: Vec<Array2<f64>> = windows
        .par_iter()
        .map(|t| t.dot(&p.weights.t()) + p.bias.view().insert_axis(Axis(0)))
        .collect();
    for (j, z) in cols.into_iter().enumerate() {
        out.column_mut(j).assign(&Array1::from_iter(z.iter().copied()));
    }
    Ok(out)
}

fn conv_backward(
    spec: &ConvSpec,
    p: &LayerParams,
    x: &Array2<f64>,
    dy: &Array2<f64>,
) -> Result<(LayerParams, Array2<f64>)> {
    let windows = column_windows(spec, x)?;
    let (positions, wl) = (spec.positions(), spec.window_len());
    let per_sample: Vec<(Array2<f64>, Array1<f64>, Vec<f64>)> = windows
        .par_iter()
        .enumerate()
        .map(|(j, t)| {
            let dz = Array2::from_shape_vec((positions, spec.filters), dy.column(j).to_vec()).expect("dz shape");
            let dw = dz.t().dot(t);
            let db = dz.sum_axis(Axis(0));
            let dt = dz.dot(&p.weights);
            let mut dx = vec![0.0; spec.input_len()];
            for pos in 0..positions {
                for e in 0..wl {
                    if let Some(i) = spec.source_index(pos, e) {
                        dx[i] += dt[[pos, e]];
                    }
                }
            }
            (dw, db, dx)
        })
        .collect();
    let mut grads = p.zeros_like();
    let mut dx = Array2::zeros(x.dim());
    // summed in sample order regardless of scheduling
    for (j, (dw, db, dxj)) in per_sample.into_iter().enumerate() {
        grads.weights += &dw;
        grads.bias += &db;
        dx.column_mut(j).assign(&Array1::from(dxj));
    }
    Ok((grads, dx))
}

fn pool_forward(input: [usize; 3], size: usize, x: &Array2<f64>) -> Array2<f64> {
    let [h, w, c] = input;
    let (oh, ow) = (h / size, w / size);
    let norm = (size * size) as f64;
    let mut out = Array2::zeros((oh * ow * c, x.ncols()));
    for j in 0..x.ncols() {
        let col = x.column(j);
        let mut o = out.slice_mut(s![.., j]);
        for y in 0..h {
            for xx in 0..w {
                for ch in 0..c {
                    o[((y / size) * ow + xx / size) * c + ch] += col[(y * w + xx) * c + ch] / norm;
                }
            }
        }
    }
    out
}

fn pool_backward(input: [usize; 3], size: usize, dy: &Array2<f64>) -> Array2<f64> {
    let [h, w, c] = input;
    let ow = w / size;
    let norm = (size * size) as f64;
    let mut dx = Array2::zeros((h * w * c, dy.ncols()));
    for j in 0..dy.ncols() {
        let g = dy.column(j);
        for y in 0..h {
            for xx in 0..w {
                for ch in 0..c {
                    dx[[(y * w + xx) * c + ch, j]] = g[((y / size) * ow + xx / size) * c + ch] / norm;
                }
            }
        }
    }
    dx
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn dense_forward_by_hand() {
        let l = LayerSpec::Dense { inputs: 2, outputs: 2 };
        let p = LayerParams {
            weights: array![[1.0, 2.0], [-1.0, 0.5]],
            bias: array![0.5, -0.5],
        };
        let x = array![[1.0, 0.0], [2.0, 4.0]];
        let y = l.forward(Some(&p), &x).unwrap();
        assert_eq!(y, array![[5.5, 8.5], [-0.5, 1.5]]);
        assert!(l.forward(None, &x).is_err());
        assert!(l.forward(Some(&p), &array![[1.0]]).is_err());
    }

    #[test]
    fn conv_forward_matches_direct_loops() {
        let spec = ConvSpec::new([4, 4, 2], 3, 1, 1, 3).unwrap();
        let l = LayerSpec::Conv(spec);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let p = l.init_params(Init::Glorot, &mut rng).unwrap();
        let x = Array2::from_shape_simple_fn((32, 2), || rng.gen_range(-1.0..1.0));
        let y = l.forward(Some(&p), &x).unwrap();
        for j in 0..2 {
            for oy in 0..4 {
                for ox in 0..4 {
                    for f in 0..3 {
                        let mut acc = p.bias[f];
                        for dy in 0..3 {
                            for dx in 0..3 {
                                let (iy, ix) = (oy as isize + dy as isize - 1, ox as isize + dx as isize - 1);
                                if iy < 0 || ix < 0 || iy >= 4 || ix >= 4 {
                                    continue;
                                }
                                for c in 0..2 {
                                    acc += x[[((iy * 4 + ix) * 2 + c as isize) as usize, j]]
                                        * p.weights[[f, (dy * 3 + dx) * 2 + c]];
                                }
                            }
                        }
                        assert!((y[[(oy * 4 + ox) * 3 + f, j]] - acc).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn pool_averages_blocks() {
        let l = LayerSpec::AvgPool {
            input: [2, 2, 1],
            size: 2,
        };
        let y = l.forward(None, &array![[1.0], [2.0], [3.0], [6.0]]).unwrap();
        assert_eq!(y, array![[3.0]]);
        let (_, dx) = l
            .backward(None, &array![[1.0], [2.0], [3.0], [6.0]], &y, &array![[4.0]])
            .unwrap();
        assert_eq!(dx, array![[1.0], [1.0], [1.0], [1.0]]);
    }

    #[test]
    fn init_ranges() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let l = LayerSpec::Dense {
            inputs: 100,
            outputs: 10,
        };
        let g = l.init_params(Init::Glorot, &mut rng).unwrap();
        let lim = (6.0f64 / 110.0).sqrt();
        assert!(g.weights.iter().all(|w| w.abs() <= lim));
        let s = l.init_params(Init::ScaledUniform, &mut rng).unwrap();
        assert!(s.weights.iter().all(|w| w.abs() <= 0.05));
        assert!(s.bias.iter().all(|&b| b == 0.0));
        assert!(LayerSpec::Sigmoid.init_params(Init::Glorot, &mut rng).is_none());
    }

    #[test]
    fn params_json_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let p = LayerSpec::Dense { inputs: 3, outputs: 2 }
            .init_params(Init::Glorot, &mut rng)
            .unwrap();
        let back: LayerParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<LayerParams>(r#"{"shape":[1,2],"weights":[1.0],"bias":[0.0]}"#).is_err());
    }
}
