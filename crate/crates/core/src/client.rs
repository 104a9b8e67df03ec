//! Client-side preparation: batching, one-hot labels, quantization and
//! encryption into a [`ClientBundle`].
//!
//! Besides the `features × batch` matrix used by the secure feed-forward,
//! every batch carries a second, transposed encryption of its features
//! (`batch × features`, zero-padded to the nominal batch size) from which the
//! server computes the first layer's weight gradient. For a convolutional
//! first layer the two views are the per-sample window list and the
//! per-sample `positions × window_len` patch matrix.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::authority::PublicKeys;
use crate::encoding::{FixedPointCodec, QuantTensor};
use crate::error::{Error, Result};
use crate::mnist::{Dataset, PixelScaling};
use crate::parallel::Workers;
use crate::secure_conv::{self, window_matrix, ConvSpec, EncryptedWindowList};
use crate::secure_matrix::{self, EncryptedMatrix, Views};

pub const BUNDLE_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleShapes {
    pub samples: usize,
    pub feature_len: usize,
    pub classes: usize,
    pub batch_size: usize,
    #[serde(default)]
    pub conv: Option<ConvSpec>,
}

impl BundleShapes {
    pub fn batches(&self) -> usize {
        self.samples.div_ceil(self.batch_size)
    }

    pub fn batch_len(&self, b: usize) -> usize {
        (self.samples - b * self.batch_size).min(self.batch_size)
    }

    /// FEIP vector lengths a key authority must provision for this bundle.
    pub fn required_etas(&self) -> Vec<usize> {
        let mut etas = vec![self.classes];
        match self.conv {
            None => etas.extend([self.feature_len, self.batch_size]),
            Some(spec) => etas.extend([spec.window_len(), spec.positions()]),
        }
        etas.sort_unstable();
        etas.dedup();
        etas
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EncryptedFeatures {
    Dense {
        /// `feature_len × size`.
        matrix: EncryptedMatrix,
        /// `batch_size × feature_len`, rows past `size` zero.
        transposed: EncryptedMatrix,
    },
    Windows {
        windows: Vec<EncryptedWindowList>,
        /// One `positions × window_len` matrix per sample.
        patches: Vec<EncryptedMatrix>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncryptedBatch {
    pub index: usize,
    pub size: usize,
    pub features: EncryptedFeatures,
    /// `classes × size` one-hot columns.
    pub labels: EncryptedMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientBundle {
    pub version: u32,
    pub codec: FixedPointCodec,
    pub scaling: PixelScaling,
    pub shapes: BundleShapes,
    /// [`PublicKeys::fingerprint`] of the keys used for encryption.
    pub mpk_fingerprint: String,
    pub batches: Vec<EncryptedBatch>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClientOptions {
    pub codec: FixedPointCodec,
    pub batch_size: usize,
    pub scaling: PixelScaling,
    pub conv: Option<ConvSpec>,
    /// Views of the dense feature matrix; labels always get both.
    pub feature_views: Views,
}

impl Default for ClientOptions {
    fn default() -> Self {
        ClientOptions {
            codec: FixedPointCodec::default(),
            batch_size: 64,
            scaling: PixelScaling::Standardize,
            conv: None,
            feature_views: Views::DotOnly,
        }
    }
}

/// A batch after quantization, before encryption. This is what the
/// plaintext reference trainer consumes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizedBatch {
    pub size: usize,
    /// `feature_len × size`.
    pub features: QuantTensor,
    /// `classes × size`.
    pub labels: QuantTensor,
}

impl QuantizedBatch {
    pub fn sample(&self, j: usize) -> QuantTensor {
        QuantTensor::new(
            vec![self.features.shape[0]],
            self.features.scale_power,
            self.features.column(j),
        )
        .expect("column length")
    }

    pub fn class_ids(&self) -> Vec<usize> {
        (0..self.size)
            .map(|j| self.labels.column(j).iter().position(|&v| v != 0).unwrap_or(0))
            .collect()
    }
}

fn check_options(ds: &Dataset, classes: usize, opts: &ClientOptions) -> Result<BundleShapes> {
    if opts.batch_size == 0 {
        return Err(Error::InvalidParams("batch size must be at least 1".into()));
    }
    if classes == 0 {
        return Err(Error::InvalidParams("at least one class is needed".into()));
    }
    if let Some(&bad) = ds.labels.iter().find(|&&l| l >= classes) {
        return Err(Error::DomainError(format!("label {bad} with {classes} classes")));
    }
    if let Some(spec) = opts.conv {
        if spec.input_len() != ds.feature_len {
            return Err(Error::ShapeMismatch(format!(
                "convolution expects {} inputs, samples have {}",
                spec.input_len(),
                ds.feature_len
            )));
        }
    }
    Ok(BundleShapes {
        samples: ds.len(),
        feature_len: ds.feature_len,
        classes,
        batch_size: opts.batch_size,
        conv: opts.conv,
    })
}

/// Batches, scales, one-hot encodes and quantizes `ds`.
pub fn quantize_batches(ds: &Dataset, classes: usize, opts: &ClientOptions) -> Result<Vec<QuantizedBatch>> {
    let shapes = check_options(ds, classes, opts)?;
    let codec = &opts.codec;
    (0..shapes.batches())
        .map(|b| {
            let start = b * opts.batch_size;
            let size = shapes.batch_len(b);
            let features = codec.quantize_matrix(&ds.matrix(start..start + size, opts.scaling))?;
            let one_hot = crate::nn::one_hot(&ds.labels[start..start + size], classes)?;
            let labels = codec.quantize_matrix(&one_hot)?;
            Ok(QuantizedBatch { size, features, labels })
        })
        .collect()
}

/// Encrypts every batch of `ds` under `pk`.
pub fn client_prepare<R: Rng + ?Sized>(
    ds: &Dataset,
    classes: usize,
    pk: &PublicKeys,
    opts: &ClientOptions,
    rng: &mut R,
    workers: &Workers,
) -> Result<ClientBundle> {
    let shapes = check_options(ds, classes, opts)?;
    let codec = &opts.codec;
    let mut batches = Vec::with_capacity(shapes.batches());
    for (index, q) in quantize_batches(ds, classes, opts)?.into_iter().enumerate() {
        let features = match opts.conv {
            None => {
                let matrix =
                    secure_matrix::pre_process_encryption(&q.features, pk, opts.feature_views, codec, rng, workers)?;
                let mut padded = QuantTensor::zeros(vec![opts.batch_size, shapes.feature_len], q.features.scale_power);
                let t = q.features.transpose()?;
                padded.data[..t.data.len()].copy_from_slice(&t.data);
                let transposed =
                    secure_matrix::pre_process_encryption(&padded, pk, Views::DotOnly, codec, rng, workers)?;
                EncryptedFeatures::Dense { matrix, transposed }
            }
            Some(spec) => {
                let mut windows = Vec::with_capacity(q.size);
                let mut patches = Vec::with_capacity(q.size);
                for j in 0..q.size {
                    let image = q.sample(j);
                    let image = QuantTensor::new(
                        vec![spec.height, spec.width, spec.channels],
                        image.scale_power,
                        image.data,
                    )?;
                    windows.push(secure_conv::pre_process_encryption(&image, &spec, pk, rng, workers)?);
                    let t = window_matrix(&spec, &image)?;
                    patches.push(secure_matrix::pre_process_encryption(
                        &t,
                        pk,
                        Views::DotOnly,
                        codec,
                        rng,
                        workers,
                    )?);
                }
                EncryptedFeatures::Windows { windows, patches }
            }
        };
        let labels = secure_matrix::pre_process_encryption(&q.labels, pk, Views::Both, codec, rng, workers)?;
        batches.push(EncryptedBatch {
            index,
            size: q.size,
            features,
            labels,
        });
    }
    Ok(ClientBundle {
        version: BUNDLE_VERSION,
        codec: *codec,
        scaling: opts.scaling,
        shapes,
        mpk_fingerprint: pk.fingerprint(),
        batches,
    })
}

/// Ciphertext counts of a bundle.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BundleStats {
    pub feip_ciphertexts: usize,
    pub feip_elements: usize,
    pub febo_ciphertexts: usize,
}

impl ClientBundle {
    pub fn validate(&self) -> Result<()> {
        if self.version != BUNDLE_VERSION {
            return Err(Error::malformed(
                "version",
                format!("unsupported bundle version {}", self.version),
            ));
        }
        let s = &self.shapes;
        if s.batch_size == 0 || self.batches.len() != s.batches() {
            return Err(Error::malformed(
                "batches",
                format!(
                    "{} batches for {} samples of batch size {}",
                    self.batches.len(),
                    s.samples,
                    s.batch_size
                ),
            ));
        }
        for (b, batch) in self.batches.iter().enumerate() {
            let pos = |what: &str| format!("batches[{b}].{what}");
            let size = s.batch_len(b);
            if batch.index != b || batch.size != size {
                return Err(Error::malformed(
                    pos("size"),
                    format!("expected batch {b} of {size} samples"),
                ));
            }
            batch
                .labels
                .validate()
                .map_err(|e| Error::malformed(pos("labels"), e.to_string()))?;
            if batch.labels.shape != [s.classes, size] || !batch.labels.has_elementwise() {
                return Err(Error::malformed(
                    pos("labels"),
                    "label matrix must be classes x size with both views",
                ));
            }
            match (&batch.features, s.conv) {
                (EncryptedFeatures::Dense { matrix, transposed }, None) => {
                    matrix
                        .validate()
                        .map_err(|e| Error::malformed(pos("features.matrix"), e.to_string()))?;
                    transposed
                        .validate()
                        .map_err(|e| Error::malformed(pos("features.transposed"), e.to_string()))?;
                    if matrix.shape != [s.feature_len, size] || transposed.shape != [s.batch_size, s.feature_len] {
                        return Err(Error::malformed(pos("features"), "feature matrix shapes"));
                    }
                }
                (EncryptedFeatures::Windows { windows, patches }, Some(spec)) => {
                    if windows.len() != size || patches.len() != size {
                        return Err(Error::malformed(
                            pos("features"),
                            "one window list and patch matrix per sample",
                        ));
                    }
                    for w in windows {
                        if w.spec != spec {
                            return Err(Error::malformed(pos("features.windows"), "convolution spec differs"));
                        }
                        w.validate()
                            .map_err(|e| Error::malformed(pos("features.windows"), e.to_string()))?;
                    }
                    for p in patches {
                        p.validate()
                            .map_err(|e| Error::malformed(pos("features.patches"), e.to_string()))?;
                        if p.shape != [spec.positions(), spec.window_len()] {
                            return Err(Error::malformed(pos("features.patches"), "patch matrix shape"));
                        }
                    }
                }
                _ => {
                    return Err(Error::malformed(
                        pos("features"),
                        "feature kind does not match the shapes",
                    ))
                }
            }
        }
        Ok(())
    }

    /// Fails with `KeyMismatch` unless the bundle was encrypted under `pk`.
    pub fn check_keys(&self, pk: &PublicKeys) -> Result<()> {
        if self.mpk_fingerprint != pk.fingerprint() {
            return Err(Error::KeyMismatch(format!(
                "bundle was encrypted under public keys {}, these are {}",
                &self.mpk_fingerprint[..self.mpk_fingerprint.len().min(16)],
                &pk.fingerprint()[..16]
            )));
        }
        Ok(())
    }

    pub fn stats(&self) -> BundleStats {
        let mut st = BundleStats::default();
        let add_matrix = |m: &EncryptedMatrix, st: &mut BundleStats| {
            st.feip_ciphertexts += m.col_cts.len();
            st.feip_elements += m.col_cts.iter().map(|c| c.ct.len() + 1).sum::<usize>();
            st.febo_ciphertexts += m.elem_cts.iter().map(Vec::len).sum::<usize>();
        };
        for b in &self.batches {
            add_matrix(&b.labels, &mut st);
            match &b.features {
                EncryptedFeatures::Dense { matrix, transposed } => {
                    add_matrix(matrix, &mut st);
                    add_matrix(transposed, &mut st);
                }
                EncryptedFeatures::Windows { windows, patches } => {
                    for w in windows {
                        st.feip_ciphertexts += w.windows.len();
                        st.feip_elements += w.windows.iter().map(|c| c.ct.len() + 1).sum::<usize>();
                    }
                    for p in patches {
                        add_matrix(p, &mut st);
                    }
                }
            }
        }
        st
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec(self)?)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bundle: ClientBundle = serde_json::from_slice(bytes)?;
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// SHA-256 of the serialized bundle, hex.
    pub fn digest(&self) -> Result<String> {
        Ok(sha256_hex(&self.to_bytes()?))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
