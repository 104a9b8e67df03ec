//! Fixed-point bridge between real-valued tensors and the integer plaintexts
//! the FE schemes operate on.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::febo::BasicOp;

/// Decimal fixed-point codec: a real `v` is carried as `round(v · 10^digits)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CodecRepr", into = "CodecRepr")]
pub struct FixedPointCodec {
    scale_digits: u32,
    value_bound: i64,
}

#[derive(Serialize, Deserialize)]
struct CodecRepr {
    scale_digits: u32,
    scale_factor: i64,
    value_bound: i64,
}

impl TryFrom<CodecRepr> for FixedPointCodec {
    type Error = Error;

    fn try_from(r: CodecRepr) -> Result<Self> {
        let codec = FixedPointCodec::new(r.scale_digits, r.value_bound)?;
        if codec.scale_factor() != r.scale_factor {
            return Err(Error::InvalidParams(format!(
                "scale_factor {} is not 10^{}",
                r.scale_factor, r.scale_digits
            )));
        }
        Ok(codec)
    }
}

impl From<FixedPointCodec> for CodecRepr {
    fn from(c: FixedPointCodec) -> Self {
        CodecRepr {
            scale_digits: c.scale_digits,
            scale_factor: c.scale_factor(),
            value_bound: c.value_bound,
        }
    }
}

impl Default for FixedPointCodec {
    /// Two decimal places, reals in `[-255, 255]`.
    fn default() -> Self {
        FixedPointCodec {
            scale_digits: 2,
            value_bound: 25_500,
        }
    }
}

impl FixedPointCodec {
    pub fn new(scale_digits: u32, value_bound: i64) -> Result<Self> {
        if scale_digits > 9 {
            return Err(Error::InvalidParams(format!("scale_digits {scale_digits} > 9")));
        }
        if value_bound < 1 || value_bound > i32::MAX as i64 {
            return Err(Error::InvalidParams(format!("value_bound {value_bound} out of range")));
        }
        Ok(FixedPointCodec {
            scale_digits,
            value_bound,
        })
    }

    /// Codec with `scale_digits` decimals whose real range is `[-max_abs, max_abs]`.
    pub fn with_real_range(scale_digits: u32, max_abs: f64) -> Result<Self> {
        let factor = 10f64.powi(scale_digits as i32);
        Self::new(scale_digits, (max_abs * factor).round() as i64)
    }

    pub fn scale_digits(&self) -> u32 {
        self.scale_digits
    }

    pub fn scale_factor(&self) -> i64 {
        10i64.pow(self.scale_digits)
    }

    pub fn value_bound(&self) -> i64 {
        self.value_bound
    }

    /// Largest representable real magnitude.
    pub fn max_real(&self) -> f64 {
        self.value_bound as f64 / self.scale_factor() as f64
    }

    /// Rounds half away from zero.
    pub fn quantize_value(&self, v: f64) -> Result<i64> {
        let q = (v * self.scale_factor() as f64).round();
        if !q.is_finite() || q.abs() > self.value_bound as f64 {
            return Err(Error::OutOfRange {
                value: v,
                limit: self.max_real(),
            });
        }
        Ok(q as i64)
    }

    pub fn quantize(&self, shape: &[usize], values: &[f64]) -> Result<QuantTensor> {
        let data = values
            .iter()
            .map(|&v| self.quantize_value(v))
            .collect::<Result<Vec<_>>>()?;
        QuantTensor::new(shape.to_vec(), 1, data)
    }

    pub fn quantize_matrix(&self, m: &Array2<f64>) -> Result<QuantTensor> {
        let values: Vec<f64> = m.iter().copied().collect();
        self.quantize(&[m.nrows(), m.ncols()], &values)
    }

    /// Like [`quantize_value`](Self::quantize_value) but saturating at the bound.
    pub fn quantize_clamped(&self, v: f64) -> i64 {
        let q = (v * self.scale_factor() as f64).round();
        if q.is_nan() {
            0
        } else {
            q.clamp(-(self.value_bound as f64), self.value_bound as f64) as i64
        }
    }

    pub fn dequantize_value(&self, q: i64, scale_power: u32) -> f64 {
        q as f64 / (self.scale_factor() as f64).powi(scale_power as i32)
    }

    pub fn dequantize(&self, t: &QuantTensor) -> Vec<f64> {
        t.data
            .iter()
            .map(|&q| self.dequantize_value(q, t.scale_power))
            .collect()
    }

    pub fn dequantize_matrix(&self, t: &QuantTensor) -> Result<Array2<f64>> {
        let (rows, cols) = t.dims2()?;
        Ok(Array2::from_shape_vec((rows, cols), self.dequantize(t)).expect("shape checked"))
    }

    /// `eta · value_bound²`: the largest inner product of two in-range vectors.
    pub fn dot_bound(&self, eta: usize) -> u64 {
        dot_bound_mixed(eta, self.value_bound, self.value_bound)
    }

    /// Largest `|x op y|` for in-range operands.
    pub fn elementwise_bound(&self, op: BasicOp) -> u64 {
        let vb = self.value_bound as u64;
        match op {
            BasicOp::Add | BasicOp::Sub => 2 * vb,
            BasicOp::Mul => vb * vb,
            BasicOp::Div => vb,
        }
    }
}

/// `eta · bound_a · bound_b`, saturating.
pub fn dot_bound_mixed(eta: usize, bound_a: i64, bound_b: i64) -> u64 {
    (eta as u64)
        .saturating_mul(bound_a.unsigned_abs())
        .saturating_mul(bound_b.unsigned_abs())
}

/// Integer tensor whose true value is `data / scale_factor^scale_power`.
/// Row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantTensor {
    pub shape: Vec<usize>,
    pub scale_power: u32,
    pub data: Vec<i64>,
}

impl QuantTensor {
    pub fn new(shape: Vec<usize>, scale_power: u32, data: Vec<i64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(QuantTensor {
            shape,
            scale_power,
            data,
        })
    }

    pub fn zeros(shape: Vec<usize>, scale_power: u32) -> Self {
        let n = shape.iter().product();
        QuantTensor {
            shape,
            scale_power,
            data: vec![0; n],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>], scale_power: u32) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        let data = rows.iter().flatten().copied().collect();
        Self::new(vec![rows.len(), cols], scale_power, data)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// `(rows, cols)` of a 2-D tensor.
    pub fn dims2(&self) -> Result<(usize, usize)> {
        match self.shape[..] {
            [r, c] => Ok((r, c)),
            _ => Err(Error::ShapeMismatch(format!(
                "expected 2-D tensor, got {:?}",
                self.shape
            ))),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.shape[1] + j]
    }

    pub fn row(&self, i: usize) -> &[i64] {
        let c = self.shape[1];
        &self.data[i * c..(i + 1) * c]
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        let (r, c) = (self.shape[0], self.shape[1]);
        (0..r).map(|i| self.data[i * c + j]).collect()
    }

    pub fn transpose(&self) -> Result<Self> {
        let (r, c) = self.dims2()?;
        let mut data = Vec::with_capacity(r * c);
        for j in 0..c {
            for i in 0..r {
                data.push(self.data[i * c + j]);
            }
        }
        Self::new(vec![c, r], self.scale_power, data)
    }

    /// Exact integer product `self · rhs`; scale powers add.
    pub fn matmul(&self, rhs: &QuantTensor) -> Result<Self> {
        let (n, k) = self.dims2()?;
        let (k2, m) = rhs.dims2()?;
        if k != k2 {
            return Err(Error::ShapeMismatch(format!("{n}x{k} · {k2}x{m}")));
        }
        let mut data = vec![0i64; n * m];
        for i in 0..n {
            for t in 0..k {
                let a = self.data[i * k + t];
                if a == 0 {
                    continue;
                }
                let row = &rhs.data[t * m..(t + 1) * m];
                for (out, &b) in data[i * m..(i + 1) * m].iter_mut().zip(row) {
                    *out += a * b;
                }
            }
        }
        Self::new(vec![n, m], self.scale_power + rhs.scale_power, data)
    }

    /// Element-wise `self op rhs` with scale-power bookkeeping (add/sub keep
    /// it, mul adds, div subtracts). `None` on an inexact division.
    pub fn elementwise(&self, op: BasicOp, rhs: &QuantTensor) -> Result<Option<Self>> {
        if self.shape != rhs.shape {
            return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", self.shape, rhs.shape)));
        }
        let scale_power = match op {
            BasicOp::Add | BasicOp::Sub => {
                if self.scale_power != rhs.scale_power {
                    return Err(Error::ShapeMismatch("scale powers differ".into()));
                }
                self.scale_power
            }
            BasicOp::Mul => self.scale_power + rhs.scale_power,
            BasicOp::Div => self.scale_power.saturating_sub(rhs.scale_power),
        };
        let data: Option<Vec<i64>> = self.data.iter().zip(&rhs.data).map(|(&x, &y)| op.apply(x, y)).collect();
        Ok(match data {
            Some(data) => Some(Self::new(self.shape.clone(), scale_power, data)?),
            None => None,
        })
    }

    pub fn map(&self, f: impl Fn(i64) -> i64) -> Self {
        QuantTensor {
            shape: self.shape.clone(),
            scale_power: self.scale_power,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn max_abs(&self) -> i64 {
        self.data.iter().map(|v| v.abs()).max().unwrap_or(0)
    }
}
