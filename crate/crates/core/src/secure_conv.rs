//! Secure convolution for a first convolutional layer.
//!
//! The client zero-pads the image, cuts it into one window per output
//! position and FEIP-encrypts each flattened window. A key for a flattened
//! kernel then opens the weighted sum of every window, which is exactly one
//! output pixel.
//!
//! Windows are flattened row-major and channel-minor: element `(dy, dx, c)`
//! sits at `(dy * size + dx) * channels + c`. Images are `H × W × C`, also
//! channel-minor. Kernels use the window layout.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::authority::{KeyRequest, KeyService, PublicKeys};
use crate::encoding::{FixedPointCodec, QuantTensor};
use crate::error::{Error, Result};
use crate::feip::{self, FeipCiphertext, FeipFunctionKey};
use crate::parallel::Workers;
use crate::secure_matrix::FunctionKeyBatch;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ConvSpecRepr", into = "ConvSpecRepr")]
pub struct ConvSpec {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub size: usize,
    pub padding: usize,
    pub stride: usize,
    pub filters: usize,
}

#[derive(Serialize, Deserialize)]
struct ConvSpecRepr {
    height: usize,
    width: usize,
    channels: usize,
    size: usize,
    padding: usize,
    stride: usize,
    filters: usize,
}

impl TryFrom<ConvSpecRepr> for ConvSpec {
    type Error = Error;

    fn try_from(r: ConvSpecRepr) -> Result<Self> {
        ConvSpec::new([r.height, r.width, r.channels], r.size, r.padding, r.stride, r.filters)
    }
}

impl From<ConvSpec> for ConvSpecRepr {
    fn from(s: ConvSpec) -> Self {
        ConvSpecRepr {
            height: s.height,
            width: s.width,
            channels: s.channels,
            size: s.size,
            padding: s.padding,
            stride: s.stride,
            filters: s.filters,
        }
    }
}

impl ConvSpec {
    pub fn new(input: [usize; 3], size: usize, padding: usize, stride: usize, filters: usize) -> Result<Self> {
        let [height, width, channels] = input;
        if height == 0 || width == 0 || channels == 0 || size == 0 || stride == 0 || filters == 0 {
            return Err(Error::InvalidParams("convolution dimensions must be positive".into()));
        }
        for (name, extent) in [("height", height), ("width", width)] {
            let padded = extent + 2 * padding;
            if padded < size {
                return Err(Error::InvalidParams(format!(
                    "filter {size} larger than padded {name} {padded}"
                )));
            }
            if !(padded - size).is_multiple_of(stride) {
                return Err(Error::InvalidParams(format!(
                    "padded {name} {padded} minus filter {size} is not a multiple of stride {stride}"
                )));
            }
        }
        Ok(ConvSpec {
            height,
            width,
            channels,
            size,
            padding,
            stride,
            filters,
        })
    }

    pub fn out_height(&self) -> usize {
        (self.height + 2 * self.padding - self.size) / self.stride + 1
    }

    pub fn out_width(&self) -> usize {
        (self.width + 2 * self.padding - self.size) / self.stride + 1
    }

    pub fn positions(&self) -> usize {
        self.out_height() * self.out_width()
    }

    pub fn window_len(&self) -> usize {
        self.size * self.size * self.channels
    }

    pub fn input_len(&self) -> usize {
        self.height * self.width * self.channels
    }

    /// Encrypted elements per plaintext element.
    pub fn expansion_factor(&self) -> f64 {
        (self.positions() * self.window_len()) as f64 / self.input_len() as f64
    }

    /// Input index read by window element `e` at output position `pos`, or
    /// `None` when it falls in the padding.
    pub fn source_index(&self, pos: usize, e: usize) -> Option<usize> {
        let (oy, ox) = (pos / self.out_width(), pos % self.out_width());
        let c = e % self.channels;
        let cell = e / self.channels;
        let (dy, dx) = (cell / self.size, cell % self.size);
        let y = (oy * self.stride + dy).checked_sub(self.padding)?;
        let x = (ox * self.stride + dx).checked_sub(self.padding)?;
        (y < self.height && x < self.width).then(|| (y * self.width + x) * self.channels + c)
    }
}

/// All windows of `image`, in output-position order, padding filled with
/// `T::default()`.
pub fn extract_windows<T: Copy + Default>(spec: &ConvSpec, image: &[T]) -> Result<Vec<Vec<T>>> {
    if image.len() != spec.input_len() {
        return Err(Error::ShapeMismatch(format!(
            "image has {} values, spec needs {}x{}x{}",
            image.len(),
            spec.height,
            spec.width,
            spec.channels
        )));
    }
    Ok((0..spec.positions())
        .map(|pos| {
            (0..spec.window_len())
                .map(|e| spec.source_index(pos, e).map_or_else(T::default, |i| image[i]))
                .collect()
        })
        .collect())
}

/// The `positions × window_len` window matrix of a quantized image.
pub fn window_matrix(spec: &ConvSpec, image: &QuantTensor) -> Result<QuantTensor> {
    let rows = extract_windows(spec, &image.data)?;
    QuantTensor::from_rows(&rows, image.scale_power)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncryptedWindowList {
    pub spec: ConvSpec,
    pub scale_power: u32,
    pub windows: Vec<FeipCiphertext>,
}

impl EncryptedWindowList {
    pub fn validate(&self) -> Result<()> {
        let eta = self.spec.window_len();
        if self.windows.len() != self.spec.positions() || self.windows.iter().any(|w| w.eta != eta || w.ct.len() != eta)
        {
            return Err(Error::ShapeMismatch(format!(
                "{} windows do not match a {}x{} output of length-{eta} windows",
                self.windows.len(),
                self.spec.out_height(),
                self.spec.out_width()
            )));
        }
        Ok(())
    }
}

fn check_image(image: &QuantTensor, spec: &ConvSpec) -> Result<()> {
    let expected = [spec.height, spec.width, spec.channels];
    let ok = image.shape == expected || (image.shape == [spec.height, spec.width] && spec.channels == 1);
    if !ok {
        return Err(Error::ShapeMismatch(format!(
            "image shape {:?}, spec expects {expected:?}",
            image.shape
        )));
    }
    Ok(())
}

pub fn pre_process_encryption<R: Rng + ?Sized>(
    image: &QuantTensor,
    spec: &ConvSpec,
    pk: &PublicKeys,
    rng: &mut R,
    workers: &Workers,
) -> Result<EncryptedWindowList> {
    check_image(image, spec)?;
    let mpk = pk.feip(spec.window_len())?;
    let windows = extract_windows(spec, &image.data)?;
    let windows = workers.try_map_seeded(windows.len(), rng, |i, r| feip::encrypt(mpk, &windows[i], r))?;
    Ok(EncryptedWindowList {
        spec: *spec,
        scale_power: image.scale_power,
        windows,
    })
}

fn flatten_kernel(kernel: &QuantTensor, spec: &ConvSpec) -> Result<Vec<i64>> {
    let ok = kernel.shape == [spec.size, spec.size, spec.channels]
        || (spec.channels == 1 && kernel.shape == [spec.size, spec.size])
        || kernel.shape == [spec.window_len()];
    if !ok {
        return Err(Error::ShapeMismatch(format!(
            "kernel shape {:?}, spec expects {}x{}x{}",
            kernel.shape, spec.size, spec.size, spec.channels
        )));
    }
    Ok(kernel.data.clone())
}

/// One key for one kernel.
pub fn pre_process_key_derive(
    kernel: &QuantTensor,
    spec: &ConvSpec,
    authority: &dyn KeyService,
) -> Result<FeipFunctionKey> {
    let mut keys = pre_process_key_derive_multi(std::slice::from_ref(kernel), spec, authority)?;
    Ok(keys.remove(0))
}

/// One key per kernel, in a single request. Windows are encrypted once and
/// opened by every kernel's key.
pub fn pre_process_key_derive_multi(
    kernels: &[QuantTensor],
    spec: &ConvSpec,
    authority: &dyn KeyService,
) -> Result<Vec<FeipFunctionKey>> {
    let flat = kernels
        .iter()
        .map(|k| flatten_kernel(k, spec))
        .collect::<Result<Vec<_>>>()?;
    let req = KeyRequest::ConvKernel {
        eta: spec.window_len(),
        kernels: flat,
    };
    match authority.serve(&req)?.keys {
        FunctionKeyBatch::Dot { row_keys } if row_keys.len() == kernels.len() => Ok(row_keys),
        _ => Err(Error::MalformedRequest(
            "authority answered with the wrong key batch".into(),
        )),
    }
}

/// `out_h × out_w` map of window-kernel inner products.
pub fn secure_convolution(
    t: &EncryptedWindowList,
    fk: &FeipFunctionKey,
    kernel: &QuantTensor,
    pk: &PublicKeys,
    codec: &FixedPointCodec,
    workers: &Workers,
) -> Result<QuantTensor> {
    let out = secure_convolution_multi(
        t,
        std::slice::from_ref(fk),
        std::slice::from_ref(kernel),
        pk,
        codec,
        workers,
    )?;
    QuantTensor::new(vec![t.spec.out_height(), t.spec.out_width()], out.scale_power, out.data)
}

/// `out_h × out_w × filters` feature map, channel-minor.
pub fn secure_convolution_multi(
    t: &EncryptedWindowList,
    keys: &[FeipFunctionKey],
    kernels: &[QuantTensor],
    pk: &PublicKeys,
    codec: &FixedPointCodec,
    workers: &Workers,
) -> Result<QuantTensor> {
    let spec = &t.spec;
    if keys.len() != kernels.len() {
        return Err(Error::KeyMismatch(format!(
            "{} keys for {} kernels",
            keys.len(),
            kernels.len()
        )));
    }
    t.validate()?;
    let flat = kernels
        .iter()
        .map(|k| flatten_kernel(k, spec))
        .collect::<Result<Vec<_>>>()?;
    let mpk = pk.feip(spec.window_len())?;
    let bound = codec.dot_bound(spec.window_len());
    let nf = kernels.len();
    let data = workers.try_map_range(spec.positions() * nf, |idx| {
        let (pos, f) = (idx / nf, idx % nf);
        feip::decrypt(mpk, &t.windows[pos], &keys[f], &flat[f], bound)
    })?;
    let scale_power = t.scale_power + kernels.first().map_or(1, |k| k.scale_power);
    QuantTensor::new(vec![spec.out_height(), spec.out_width(), nf], scale_power, data)
}

/// Plaintext integer convolution with the same layout conventions.
pub fn plain_convolution(image: &QuantTensor, kernels: &[QuantTensor], spec: &ConvSpec) -> Result<QuantTensor> {
    check_image(image, spec)?;
    let windows = extract_windows(spec, &image.data)?;
    let flat = kernels
        .iter()
        .map(|k| flatten_kernel(k, spec))
        .collect::<Result<Vec<_>>>()?;
    let mut data = Vec::with_capacity(windows.len() * flat.len());
    for w in &windows {
        for k in &flat {
            data.push(w.iter().zip(k).map(|(a, b)| a * b).sum());
        }
    }
    let scale_power = image.scale_power + kernels.first().map_or(1, |k| k.scale_power);
    QuantTensor::new(vec![spec.out_height(), spec.out_width(), flat.len()], scale_power, data)
}
