//! Server-side training over a [`ClientBundle`].
//!
//! Each iteration:
//!
//! 1. quantize the first layer's weights, obtain keys for them and decrypt
//!    `W·X` (or the first convolution) from the encrypted batch;
//! 2. add the bias and run the remaining layers in the clear;
//! 3. quantize the prediction `P`, obtain element-wise subtraction keys
//!    against the encrypted labels and decrypt `Y - P`;
//! 4. backpropagate `P - Y` down to the first layer's output;
//! 5. quantize that gradient `δ`, obtain keys for it and decrypt `δ·Xᵀ`
//!    from the transposed view;
//! 6. average over the batch and take an SGD step.
//!
//! All integer work goes through a [`SecureBackend`]. [`EncryptedBackend`]
//! does it under functional encryption; [`PlainBackend`] does the same
//! integer arithmetic on the quantized plaintext and is the reference the
//! encrypted run must match bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::authority::{KeyService, PublicKeys};
use crate::client::{ClientBundle, EncryptedFeatures, QuantizedBatch};
use crate::encoding::{FixedPointCodec, QuantTensor};
use crate::error::{Error, Result};
use crate::febo::BasicOp;
use crate::mnist::PixelScaling;
use crate::nn::{self, Hyperparams, LayerParams, LayerSpec, Network, OutputKind};
use crate::parallel::Workers;
use crate::secure_conv::{self, window_matrix, ConvSpec};
use crate::secure_matrix::{self, FunctionKeyBatch, SecureFunction};

/// The integer operations that touch client data.
pub trait SecureBackend {
    fn batch_count(&self) -> usize;

    fn batch_len(&self, batch: usize) -> usize;

    /// First layer pre-activation without bias, `outputs × size`, scale 2.
    /// `w` is the quantized weight matrix (`outputs × inputs` for dense,
    /// `filters × window_len` for convolution).
    fn first_layer_forward(&self, batch: usize, w: &QuantTensor) -> Result<QuantTensor>;

    /// `δ · Xᵀ` summed over the batch, shaped like the first layer's weights, scale 2.
    fn first_layer_weight_grad(&self, batch: usize, delta: &QuantTensor) -> Result<QuantTensor>;

    /// `Y - P`, `classes × size`, scale 1.
    fn label_residual(&self, batch: usize, p: &QuantTensor) -> Result<QuantTensor>;

    /// `<y_j, logp_j>` for every sample `j`, scale 2.
    fn cross_entropy(&self, batch: usize, logp: &QuantTensor) -> Result<Vec<i64>>;
}

fn check_dense_weights(w: &QuantTensor, inputs: usize) -> Result<usize> {
    let (rows, cols) = w.dims2()?;
    if cols != inputs {
        return Err(Error::ShapeMismatch(format!(
            "first layer takes {cols} inputs, data has {inputs}"
        )));
    }
    Ok(rows)
}

fn kernels_of(w: &QuantTensor, spec: &ConvSpec) -> Result<Vec<QuantTensor>> {
    let (filters, wl) = w.dims2()?;
    if wl != spec.window_len() || filters != spec.filters {
        return Err(Error::ShapeMismatch(format!(
            "convolution weights {filters}x{wl}, bundle expects {}x{}",
            spec.filters,
            spec.window_len()
        )));
    }
    (0..filters)
        .map(|f| QuantTensor::new(vec![wl], w.scale_power, w.row(f).to_vec()))
        .collect()
}

/// Column `j` of a `(positions · filters) × size` gradient as `filters × positions`.
fn sample_delta_t(delta: &QuantTensor, j: usize, spec: &ConvSpec) -> Result<QuantTensor> {
    let col = delta.column(j);
    let (positions, filters) = (spec.positions(), spec.filters);
    let mut data = vec![0; positions * filters];
    for pos in 0..positions {
        for f in 0..filters {
            data[f * positions + pos] = col[pos * filters + f];
        }
    }
    QuantTensor::new(vec![filters, positions], delta.scale_power, data)
}

fn within(t: &QuantTensor, bound: u64) -> Result<()> {
    if t.data.iter().any(|v| v.unsigned_abs() > bound) {
        return Err(Error::NotInRange { bound });
    }
    Ok(())
}

/// Functional-encryption backend: every result is obtained by requesting
/// function keys from `keys` and decrypting the bundle's ciphertexts.
pub struct EncryptedBackend<'a> {
    pub bundle: &'a ClientBundle,
    pub pk: &'a PublicKeys,
    pub keys: &'a dyn KeyService,
    pub workers: Workers,
}

impl<'a> EncryptedBackend<'a> {
    pub fn new(bundle: &'a ClientBundle, pk: &'a PublicKeys, keys: &'a dyn KeyService, workers: Workers) -> Self {
        EncryptedBackend {
            bundle,
            pk,
            keys,
            workers,
        }
    }

    fn codec(&self) -> &FixedPointCodec {
        &self.bundle.codec
    }
}

impl SecureBackend for EncryptedBackend<'_> {
    fn batch_count(&self) -> usize {
        self.bundle.batches.len()
    }

    fn batch_len(&self, batch: usize) -> usize {
        self.bundle.batches[batch].size
    }

    fn first_layer_forward(&self, batch: usize, w: &QuantTensor) -> Result<QuantTensor> {
        let b = &self.bundle.batches[batch];
        match &b.features {
            EncryptedFeatures::Dense { matrix, .. } => {
                check_dense_weights(w, matrix.rows())?;
                let keys =
                    secure_matrix::pre_process_key_derive(w, SecureFunction::DotProduct, self.keys, Some(matrix))?;
                secure_matrix::secure_computation(
                    matrix,
                    SecureFunction::DotProduct,
                    &keys,
                    w,
                    self.pk,
                    self.codec(),
                    &self.workers,
                )
            }
            EncryptedFeatures::Windows { windows, .. } => {
                let spec = self.bundle.shapes.conv.expect("validated bundle");
                let kernels = kernels_of(w, &spec)?;
                let keys = secure_conv::pre_process_key_derive_multi(&kernels, &spec, self.keys)?;
                let rows = spec.positions() * spec.filters;
                let mut out = QuantTensor::zeros(vec![rows, b.size], 2);
                for (j, t) in windows.iter().enumerate() {
                    let map = secure_conv::secure_convolution_multi(
                        t,
                        &keys,
                        &kernels,
                        self.pk,
                        self.codec(),
                        &self.workers,
                    )?;
                    out.scale_power = map.scale_power;
                    for (r, v) in map.data.into_iter().enumerate() {
                        out.data[r * b.size + j] = v;
                    }
                }
                Ok(out)
            }
        }
    }

    fn first_layer_weight_grad(&self, batch: usize, delta: &QuantTensor) -> Result<QuantTensor> {
        let b = &self.bundle.batches[batch];
        let codec = self.codec();
        match &b.features {
            EncryptedFeatures::Dense { transposed, .. } => {
                let (rows, size) = delta.dims2()?;
                if size != b.size {
                    return Err(Error::ShapeMismatch(format!(
                        "δ has {size} columns for a batch of {}",
                        b.size
                    )));
                }
                // pad δ with zero columns to the nominal batch size
                let eta = transposed.rows();
                let mut padded = QuantTensor::zeros(vec![rows, eta], delta.scale_power);
                for i in 0..rows {
                    padded.data[i * eta..i * eta + size].copy_from_slice(delta.row(i));
                }
                let keys = secure_matrix::pre_process_key_derive(
                    &padded,
                    SecureFunction::DotProduct,
                    self.keys,
                    Some(transposed),
                )?;
                secure_matrix::secure_computation(
                    transposed,
                    SecureFunction::DotProduct,
                    &keys,
                    &padded,
                    self.pk,
                    codec,
                    &self.workers,
                )
            }
            EncryptedFeatures::Windows { patches, .. } => {
                let spec = self.bundle.shapes.conv.expect("validated bundle");
                let mut acc = QuantTensor::zeros(vec![spec.filters, spec.window_len()], 2);
                for (j, t) in patches.iter().enumerate() {
                    let y = sample_delta_t(delta, j, &spec)?;
                    let keys =
                        secure_matrix::pre_process_key_derive(&y, SecureFunction::DotProduct, self.keys, Some(t))?;
                    let z = secure_matrix::secure_computation(
                        t,
                        SecureFunction::DotProduct,
                        &keys,
                        &y,
                        self.pk,
                        codec,
                        &self.workers,
                    )?;
                    acc.scale_power = z.scale_power;
                    for (a, v) in acc.data.iter_mut().zip(z.data) {
                        *a += v;
                    }
                }
                Ok(acc)
            }
        }
    }

    fn label_residual(&self, batch: usize, p: &QuantTensor) -> Result<QuantTensor> {
        let labels = &self.bundle.batches[batch].labels;
        let keys = secure_matrix::pre_process_key_derive(p, SecureFunction::Sub, self.keys, Some(labels))?;
        secure_matrix::secure_computation(
            labels,
            SecureFunction::Sub,
            &keys,
            p,
            self.pk,
            self.codec(),
            &self.workers,
        )
    }

    fn cross_entropy(&self, batch: usize, logp: &QuantTensor) -> Result<Vec<i64>> {
        let labels = &self.bundle.batches[batch].labels;
        let probes = logp.transpose()?;
        let keys = match self
            .keys
            .serve(&crate::authority::KeyRequest::DotProduct {
                eta: labels.rows(),
                rows: (0..probes.shape[0]).map(|j| probes.row(j).to_vec()).collect(),
            })?
            .keys
        {
            FunctionKeyBatch::Dot { row_keys } => row_keys,
            FunctionKeyBatch::Elementwise { .. } => {
                return Err(Error::MalformedRequest(
                    "authority answered with element-wise keys".into(),
                ))
            }
        };
        let bound = self.codec().dot_bound(labels.rows());
        secure_matrix::secure_column_dots(labels, &keys, &probes, self.pk, bound, &self.workers)
    }
}

/// The same integer arithmetic on quantized plaintext, with the same dlog
/// bounds enforced.
pub struct PlainBackend {
    pub codec: FixedPointCodec,
    pub conv: Option<ConvSpec>,
    pub batch_size: usize,
    pub batches: Vec<QuantizedBatch>,
}

impl PlainBackend {
    fn images(&self, b: &QuantizedBatch, spec: &ConvSpec) -> Result<Vec<QuantTensor>> {
        (0..b.size)
            .map(|j| {
                let s = b.sample(j);
                QuantTensor::new(vec![spec.height, spec.width, spec.channels], s.scale_power, s.data)
            })
            .collect()
    }
}

impl SecureBackend for PlainBackend {
    fn batch_count(&self) -> usize {
        self.batches.len()
    }

    fn batch_len(&self, batch: usize) -> usize {
        self.batches[batch].size
    }

    fn first_layer_forward(&self, batch: usize, w: &QuantTensor) -> Result<QuantTensor> {
        let b = &self.batches[batch];
        match &self.conv {
            None => {
                check_dense_weights(w, b.features.shape[0])?;
                let z = w.matmul(&b.features)?;
                within(&z, self.codec.dot_bound(b.features.shape[0]))?;
                Ok(z)
            }
            Some(spec) => {
                let kernels = kernels_of(w, spec)?;
                let bound = self.codec.dot_bound(spec.window_len());
                let rows = spec.positions() * spec.filters;
                let mut out = QuantTensor::zeros(vec![rows, b.size], 2);
                for (j, image) in self.images(b, spec)?.iter().enumerate() {
                    let map = secure_conv::plain_convolution(image, &kernels, spec)?;
                    within(&map, bound)?;
                    out.scale_power = map.scale_power;
                    for (r, v) in map.data.into_iter().enumerate() {
                        out.data[r * b.size + j] = v;
                    }
                }
                Ok(out)
            }
        }
    }

    fn first_layer_weight_grad(&self, batch: usize, delta: &QuantTensor) -> Result<QuantTensor> {
        let b = &self.batches[batch];
        match &self.conv {
            None => {
                let (_, size) = delta.dims2()?;
                if size != b.size {
                    return Err(Error::ShapeMismatch(format!(
                        "δ has {size} columns for a batch of {}",
                        b.size
                    )));
                }
                let z = delta.matmul(&b.features.transpose()?)?;
                within(&z, self.codec.dot_bound(self.batch_size))?;
                Ok(z)
            }
            Some(spec) => {
                let bound = self.codec.dot_bound(spec.positions());
                let mut acc = QuantTensor::zeros(vec![spec.filters, spec.window_len()], 2);
                for (j, image) in self.images(b, spec)?.iter().enumerate() {
                    let y = sample_delta_t(delta, j, spec)?;
                    let z = y.matmul(&window_matrix(spec, image)?)?;
                    within(&z, bound)?;
                    acc.scale_power = z.scale_power;
                    for (a, v) in acc.data.iter_mut().zip(z.data) {
                        *a += v;
                    }
                }
                Ok(acc)
            }
        }
    }

    fn label_residual(&self, batch: usize, p: &QuantTensor) -> Result<QuantTensor> {
        let z = self.batches[batch]
            .labels
            .elementwise(BasicOp::Sub, p)?
            .expect("subtraction is exact");
        within(&z, self.codec.elementwise_bound(BasicOp::Sub))?;
        Ok(z)
    }

    fn cross_entropy(&self, batch: usize, logp: &QuantTensor) -> Result<Vec<i64>> {
        let labels = &self.batches[batch].labels;
        let bound = self.codec.dot_bound(labels.shape[0]);
        let (classes, size) = logp.dims2()?;
        if [classes, size] != [labels.shape[0], labels.shape[1]] {
            return Err(Error::ShapeMismatch("log-probabilities do not match the labels".into()));
        }
        let out: Vec<i64> = (0..size)
            .map(|j| (0..classes).map(|c| labels.get(c, j) * logp.get(c, j)).sum())
            .collect();
        if out.iter().any(|v| v.unsigned_abs() > bound) {
            return Err(Error::NotInRange { bound });
        }
        Ok(out)
    }
}

/// One line of the run log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub batch: usize,
    pub cost: f64,
    pub batch_acc: f64,
    pub timing_ms: f64,
}

impl IterationRecord {
    /// Equal up to wall-clock time.
    pub fn same_metrics(&self, other: &IterationRecord) -> bool {
        self.iter == other.iter
            && self.batch == other.batch
            && self.cost.to_bits() == other.cost.to_bits()
            && self.batch_acc.to_bits() == other.batch_acc.to_bits()
    }
}

/// Training driver for a network whose first layer runs through a backend.
pub struct Trainer<B: SecureBackend> {
    pub net: Network,
    pub hp: Hyperparams,
    pub codec: FixedPointCodec,
    pub backend: B,
    /// Compute the cost from encrypted labels via per-sample inner products.
    pub secure_loss: bool,
    iteration: usize,
    output: OutputKind,
}

fn ctx(iteration: usize, stage: &'static str) -> impl Fn(Error) -> Error {
    move |e| Error::Training {
        iteration,
        stage,
        source: Box::new(e),
    }
}

impl<B: SecureBackend> Trainer<B> {
    pub fn new(net: Network, hp: Hyperparams, codec: FixedPointCodec, backend: B) -> Result<Self> {
        hp.validate()?;
        let output = net.output_kind()?;
        if !net.layers[0].has_params() {
            return Err(Error::InvalidParams(
                "first layer must be dense or convolutional".into(),
            ));
        }
        Ok(Trainer {
            net,
            hp,
            codec,
            backend,
            secure_loss: false,
            iteration: 0,
            output,
        })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Iterations a full run performs.
    pub fn planned_iterations(&self) -> usize {
        let full = self.hp.epochs * self.backend.batch_count();
        self.hp.iterations.map_or(full, |n| n.min(full))
    }

    fn first_params(&self) -> &LayerParams {
        self.net.params[0].as_ref().expect("first layer has params")
    }

    /// Secure first layer plus bias: the input of layer 1.
    fn first_layer_output(&self, batch: usize, iteration: usize) -> Result<Array2<f64>> {
        let p = self.first_params();
        let wq = self
            .codec
            .quantize_matrix(&p.weights)
            .map_err(ctx(iteration, "quantize first-layer weights"))?;
        let z = self
            .backend
            .first_layer_forward(batch, &wq)
            .map_err(ctx(iteration, "secure feed-forward"))?;
        let mut a = self.codec.dequantize_matrix(&z)?;
        let filters = p.bias.len();
        for (r, mut row) in a.rows_mut().into_iter().enumerate() {
            let b = p.bias[r % filters];
            row.mapv_inplace(|v| v + b);
        }
        Ok(a)
    }

    /// One SGD iteration on `batch`.
    pub fn step(&mut self, batch: usize) -> Result<IterationRecord> {
        let started = Instant::now();
        let it = self.iteration;
        let n = self.net.layers.len();
        let size = self.backend.batch_len(batch);
        let scale = self.codec.scale_factor() as f64;

        let a1 = self.first_layer_output(batch, it)?;
        let cache = self.net.forward_range(1, &a1).map_err(ctx(it, "feed-forward"))?;
        let p = cache.output().clone();

        let pq = self.codec.quantize_matrix(&p).map_err(ctx(it, "quantize prediction"))?;
        let residual = self
            .backend
            .label_residual(batch, &pq)
            .map_err(ctx(it, "secure evaluation"))?;
        let r = self.codec.dequantize_matrix(&residual)?;
        let yq = residual.elementwise(BasicOp::Add, &pq)?.expect("addition is exact");
        let labels = nn::argmax_columns(&self.codec.dequantize_matrix(&yq)?);
        let predicted = nn::argmax_columns(&p);
        let correct = predicted.iter().zip(&labels).filter(|(a, b)| a == b).count();

        let cost = match self.output {
            OutputKind::SoftmaxCrossEntropy => {
                let logits = cache.after(n - 2);
                let logp = nn::log_softmax(logits);
                if self.secure_loss {
                    let floor = -self.codec.max_real();
                    let lq = self
                        .codec
                        .quantize_matrix(&logp.mapv(|v| v.max(floor)))
                        .map_err(ctx(it, "quantize log-probabilities"))?;
                    let dots = self.backend.cross_entropy(batch, &lq).map_err(ctx(it, "secure loss"))?;
                    -(dots.iter().sum::<i64>() as f64) / (scale * scale) / size as f64
                } else {
                    -labels.iter().enumerate().map(|(j, &c)| logp[[c, j]]).sum::<f64>() / size as f64
                }
            }
            OutputKind::SigmoidMse => 0.5 * r.iter().map(|v| v * v).sum::<f64>() / size as f64,
        };

        // ∂E/∂(output) = P - Y = -(Y - P)
        let d = r.mapv(|v| -v);
        let end = match self.output {
            OutputKind::SoftmaxCrossEntropy => n - 1,
            OutputKind::SigmoidMse => n,
        };
        let (mut grads, delta) = self
            .net
            .backward_range(&cache, 1, end, d)
            .map_err(ctx(it, "backpropagation"))?;

        let dq = self
            .codec
            .quantize_matrix(&delta)
            .map_err(ctx(it, "quantize first-layer gradient"))?;
        let gw = self
            .backend
            .first_layer_weight_grad(batch, &dq)
            .map_err(ctx(it, "secure weight gradient"))?;
        let gw = self.codec.dequantize_matrix(&gw)?;
        let filters = self.first_params().bias.len();
        let mut gb = Array1::zeros(filters);
        for (r, row) in delta.rows().into_iter().enumerate() {
            gb[r % filters] += row.sum();
        }
        grads[0] = Some(LayerParams { weights: gw, bias: gb });
        for g in grads.iter_mut().flatten() {
            g.scale(1.0 / size as f64);
        }
        nn::sgd_update(&mut self.net.params, &grads, self.hp.learning_rate).map_err(ctx(it, "parameter update"))?;

        self.iteration += 1;
        Ok(IterationRecord {
            iter: it,
            batch,
            cost,
            batch_acc: correct as f64 / size as f64,
            timing_ms: started.elapsed().as_secs_f64() * 1e3,
        })
    }

    /// Runs every planned iteration, calling `on_step` after each one.
    pub fn run(
        &mut self,
        mut on_step: impl FnMut(&IterationRecord, &Network) -> Result<()>,
    ) -> Result<Vec<IterationRecord>> {
        let batches = self.backend.batch_count();
        let mut log = Vec::new();
        while self.iteration < self.planned_iterations() {
            let rec = self.step(self.iteration % batches)?;
            on_step(&rec, &self.net)?;
            log.push(rec);
        }
        Ok(log)
    }

    /// Class predictions for every sample of the backend's data.
    pub fn predict(&self) -> Result<Vec<usize>> {
        predict_with(&self.net, &self.codec, &self.backend)
    }
}

/// Secure first layer followed by the plaintext remainder, argmax per sample.
pub fn predict_with(net: &Network, codec: &FixedPointCodec, backend: &dyn SecureBackend) -> Result<Vec<usize>> {
    let p = net.params[0]
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("first layer must be dense or convolutional".into()))?;
    let wq = codec.quantize_matrix(&p.weights)?;
    let mut out = Vec::new();
    for b in 0..backend.batch_count() {
        let z = backend.first_layer_forward(b, &wq)?;
        let mut a = codec.dequantize_matrix(&z)?;
        let filters = p.bias.len();
        for (r, mut row) in a.rows_mut().into_iter().enumerate() {
            let bias = p.bias[r % filters];
            row.mapv_inplace(|v| v + bias);
        }
        let cache = net.forward_range(1, &a)?;
        out.extend(nn::argmax_columns(cache.output()));
    }
    Ok(out)
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    if pred.is_empty() {
        return 0.0;
    }
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / pred.len() as f64
}

/// Outcome of running an encrypted and a reference trainer side by side.
#[derive(Clone, Debug, PartialEq)]
pub enum LockstepOutcome {
    ExactMatch { iterations: usize },
    Diverged { iteration: usize, detail: String },
}

/// Bitwise parameter equality.
pub fn params_identical(a: &Network, b: &Network) -> bool {
    a.params.len() == b.params.len()
        && a.params.iter().zip(&b.params).all(|(x, y)| match (x, y) {
            (Some(x), Some(y)) => {
                x.weights.dim() == y.weights.dim()
                    && x.weights
                        .iter()
                        .zip(y.weights.iter())
                        .all(|(u, v)| u.to_bits() == v.to_bits())
                    && x.bias
                        .iter()
                        .zip(y.bias.iter())
                        .all(|(u, v)| u.to_bits() == v.to_bits())
            }
            (None, None) => true,
            _ => false,
        })
}

/// Steps both trainers together, comparing parameters and metrics after
/// every iteration.
pub fn run_lockstep<A: SecureBackend, B: SecureBackend>(
    secure: &mut Trainer<A>,
    reference: &mut Trainer<B>,
    mut on_step: impl FnMut(&IterationRecord),
) -> Result<(LockstepOutcome, Vec<IterationRecord>)> {
    let batches = secure.backend.batch_count();
    if batches != reference.backend.batch_count() {
        return Err(Error::ShapeMismatch(
            "the two trainers see different batch counts".into(),
        ));
    }
    if !params_identical(&secure.net, &reference.net) {
        return Ok((
            LockstepOutcome::Diverged {
                iteration: 0,
                detail: "initial parameters differ".into(),
            },
            Vec::new(),
        ));
    }
    let mut log = Vec::new();
    while secure.iteration < secure.planned_iterations() {
        let b = secure.iteration % batches;
        let a = secure.step(b)?;
        let r = reference.step(b)?;
        on_step(&a);
        let it = a.iter;
        log.push(a.clone());
        if !a.same_metrics(&r) {
            return Ok((
                LockstepOutcome::Diverged {
                    iteration: it,
                    detail: format!("metrics differ: {a:?} vs {r:?}"),
                },
                log,
            ));
        }
        if !params_identical(&secure.net, &reference.net) {
            return Ok((
                LockstepOutcome::Diverged {
                    iteration: it,
                    detail: "parameters differ".into(),
                },
                log,
            ));
        }
    }
    Ok((LockstepOutcome::ExactMatch { iterations: log.len() }, log))
}

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub layers: Vec<LayerSpec>,
    pub params: Vec<Option<LayerParams>>,
    pub hyperparams: Hyperparams,
    pub codec: FixedPointCodec,
    pub scaling: PixelScaling,
    pub iterations: usize,
}

impl Checkpoint {
    pub fn of<B: SecureBackend>(t: &Trainer<B>, scaling: PixelScaling) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            layers: t.net.layers.clone(),
            params: t.net.params.clone(),
            hyperparams: t.hp,
            codec: t.codec,
            scaling,
            iterations: t.iteration,
        }
    }

    pub fn network(&self) -> Result<Network> {
        Network::from_parts(self.layers.clone(), self.params.clone())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = serde_json::to_vec_pretty(self)?;
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let c: Checkpoint = serde_json::from_slice(&bytes)?;
        if c.version != CHECKPOINT_VERSION {
            return Err(Error::malformed(
                "version",
                format!("unsupported checkpoint version {}", c.version),
            ));
        }
        c.network()?;
        Ok(c)
    }
}

pub fn write_run_log(path: &Path, log: &[IterationRecord]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for rec in log {
        serde_json::to_writer(&mut f, rec)?;
        f.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

pub fn read_run_log(path: &Path) -> Result<Vec<IterationRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Error::malformed(format!("{} line {}", path.display(), i + 1), e.to_string()))
        })
        .collect()
}
