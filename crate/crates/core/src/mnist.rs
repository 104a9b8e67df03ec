//! MNIST IDX files (optionally gzipped) and numeric CSV datasets.

use std::fs;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// Mean and standard deviation of MNIST pixels scaled to `[0, 1]`.
const MNIST_MEAN: f64 = 0.1307;
const MNIST_STD: f64 = 0.3081;

/// Samples as flat feature vectors plus integer class labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    /// `[height, width, channels]` for image data.
    pub image_shape: Option<[usize; 3]>,
    pub feature_len: usize,
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
}

/// How raw feature values are mapped before quantization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PixelScaling {
    Raw,
    /// `x / 255`.
    Unit,
    /// `(x / 255 - 0.1307) / 0.3081`.
    #[default]
    Standardize,
}

impl PixelScaling {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            PixelScaling::Raw => v,
            PixelScaling::Unit => v / 255.0,
            PixelScaling::Standardize => (v / 255.0 - MNIST_MEAN) / MNIST_STD,
        }
    }
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_len..(i + 1) * self.feature_len]
    }

    pub fn classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    /// The first `n` samples (all of them if fewer).
    pub fn take(&self, n: usize) -> Dataset {
        let n = n.min(self.len());
        Dataset {
            image_shape: self.image_shape,
            feature_len: self.feature_len,
            features: self.features[..n * self.feature_len].to_vec(),
            labels: self.labels[..n].to_vec(),
        }
    }

    /// Samples `range` as a `feature_len × n` matrix after `scaling`.
    pub fn matrix(&self, range: std::ops::Range<usize>, scaling: PixelScaling) -> Array2<f64> {
        let n = range.len();
        let mut m = Array2::zeros((self.feature_len, n));
        for (j, i) in range.enumerate() {
            for (k, &v) in self.sample(i).iter().enumerate() {
                m[[k, j]] = scaling.apply(v);
            }
        }
        m
    }

    pub fn load_idx(images: &Path, labels: &Path) -> Result<Dataset> {
        let (shape, pixels) = read_idx_images(images)?;
        let labels_v = read_idx_labels(labels)?;
        if labels_v.len() != pixels.len() / (shape[0] * shape[1]).max(1) {
            return Err(Error::malformed(
                format!("{}", labels.display()),
                format!(
                    "{} labels for {} images",
                    labels_v.len(),
                    pixels.len() / (shape[0] * shape[1]).max(1)
                ),
            ));
        }
        Ok(Dataset {
            image_shape: Some([shape[0], shape[1], 1]),
            feature_len: shape[0] * shape[1],
            features: pixels.into_iter().map(f64::from).collect(),
            labels: labels_v.into_iter().map(usize::from).collect(),
        })
    }

    /// Rows of `label,f0,f1,...`. A non-numeric first line is taken as a
    /// header. `image_shape` is attached when given and consistent.
    pub fn load_csv(path: &Path, image_shape: Option<[usize; 3]>) -> Result<Dataset> {
        let text = String::from_utf8(read_maybe_gz(path)?).map_err(|e| {
            Error::malformed(
                format!("{} byte {}", path.display(), e.utf8_error().valid_up_to()),
                "not UTF-8",
            )
        })?;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        let mut feature_len = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let pos = |col: usize| format!("{} line {}, column {}", path.display(), lineno + 1, col + 1);
            let label = match fields[0].parse::<usize>() {
                Ok(l) => l,
                Err(_) if lineno == 0 && labels.is_empty() => continue,
                Err(_) => {
                    return Err(Error::malformed(
                        pos(0),
                        format!("label {:?} is not a class id", fields[0]),
                    ))
                }
            };
            let row = fields[1..]
                .iter()
                .enumerate()
                .map(|(c, f)| {
                    f.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::malformed(pos(c + 1), format!("{f:?} is not a number")))
                })
                .collect::<Result<Vec<_>>>()?;
            match feature_len {
                None => feature_len = Some(row.len()),
                Some(n) if n != row.len() => {
                    return Err(Error::malformed(
                        pos(0),
                        format!("{} features, expected {n}", row.len()),
                    ))
                }
                _ => {}
            }
            features.extend(row);
            labels.push(label);
        }
        let feature_len = feature_len.unwrap_or(0);
        if let Some(s) = image_shape {
            if s.iter().product::<usize>() != feature_len {
                return Err(Error::malformed(
                    path.display().to_string(),
                    format!("{feature_len} features do not form a {s:?} image"),
                ));
            }
        }
        Ok(Dataset {
            image_shape,
            feature_len,
            features,
            labels,
        })
    }
}

fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..])
            .read_to_end(&mut out)
            .map_err(|e| Error::malformed(format!("{} (gzip)", path.display()), e.to_string()))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::malformed(format!("{} byte {offset}", path.display()), "truncated header"))
}

fn check_magic(bytes: &[u8], expected: u32, path: &Path) -> Result<()> {
    let magic = be_u32(bytes, 0, path)?;
    if magic != expected {
        return Err(Error::malformed(
            format!("{} byte 0", path.display()),
            format!("magic 0x{magic:08x}, expected 0x{expected:08x}"),
        ));
    }
    Ok(())
}

fn payload<'a>(bytes: &'a [u8], offset: usize, len: usize, path: &Path) -> Result<&'a [u8]> {
    if bytes.len() < offset + len {
        return Err(Error::malformed(
            format!("{} byte {}", path.display(), bytes.len()),
            format!("truncated: header promises {len} data bytes from offset {offset}"),
        ));
    }
    if bytes.len() > offset + len {
        return Err(Error::malformed(
            format!("{} byte {}", path.display(), offset + len),
            "trailing bytes after the data",
        ));
    }
    Ok(&bytes[offset..])
}

/// `([rows, cols], pixels)` with pixels in sample-major, row-major order.
pub fn read_idx_images(path: &Path) -> Result<([usize; 2], Vec<u8>)> {
    let bytes = read_maybe_gz(path)?;
    parse_idx_images(&bytes, path)
}

pub fn read_idx_labels(path: &Path) -> Result<Vec<u8>> {
    let bytes = read_maybe_gz(path)?;
    parse_idx_labels(&bytes, path)
}

pub fn parse_idx_images(bytes: &[u8], path: &Path) -> Result<([usize; 2], Vec<u8>)> {
    check_magic(bytes, IMAGES_MAGIC, path)?;
    let n = be_u32(bytes, 4, path)? as usize;
    let rows = be_u32(bytes, 8, path)? as usize;
    let cols = be_u32(bytes, 12, path)? as usize;
    let data = payload(bytes, 16, n * rows * cols, path)?;
    Ok(([rows, cols], data.to_vec()))
}

pub fn parse_idx_labels(bytes: &[u8], path: &Path) -> Result<Vec<u8>> {
    check_magic(bytes, LABELS_MAGIC, path)?;
    let n = be_u32(bytes, 4, path)? as usize;
    Ok(payload(bytes, 8, n, path)?.to_vec())
}

/// IDX encodings, used for fixtures and tests.
pub fn encode_idx_images(shape: [usize; 2], pixels: &[u8]) -> Vec<u8> {
    let n = pixels.len() / (shape[0] * shape[1]).max(1);
    let mut out = Vec::with_capacity(16 + pixels.len());
    for v in [IMAGES_MAGIC, n as u32, shape[0] as u32, shape[1] as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
