//! Timing of the primitive operations against element count and worker count.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::authority::AuthorityState;
use crate::encoding::{FixedPointCodec, QuantTensor};
use crate::error::{Error, Result};
use crate::febo;
use crate::group::GroupParams;
use crate::parallel::Workers;
use crate::secure_matrix::{self, SecureFunction, Views};

/// Vector length of every dot product timed by `dec-dot`.
pub const DOT_ETA: usize = 16;
/// Plaintext entries are drawn from `[-ENTRY_BOUND, ENTRY_BOUND]`.
pub const ENTRY_BOUND: i64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchOp {
    /// Element-wise encryption of `size` values.
    Enc,
    /// Element-wise subtraction keys for `size` ciphertexts, served by the authority.
    Keyderive,
    /// Decryption of `size` element-wise sums.
    DecAdd,
    /// Decryption of `size` element-wise products.
    DecMul,
    /// Decryption of `size` inner products of length [`DOT_ETA`].
    DecDot,
}

impl BenchOp {
    pub const ALL: [BenchOp; 5] = [
        BenchOp::Enc,
        BenchOp::Keyderive,
        BenchOp::DecAdd,
        BenchOp::DecMul,
        BenchOp::DecDot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchOp::Enc => "enc",
            BenchOp::Keyderive => "keyderive",
            BenchOp::DecAdd => "dec-add",
            BenchOp::DecMul => "dec-mul",
            BenchOp::DecDot => "dec-dot",
        }
    }
}

impl fmt::Display for BenchOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BenchOp::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown benchmark op {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub op: BenchOp,
    pub size: usize,
    pub workers: usize,
    pub ms: f64,
}

/// Keys and parameters shared by all measurements.
pub struct BenchContext {
    authority: AuthorityState,
}

impl BenchContext {
    pub fn new(params: &GroupParams, seed: u64) -> Self {
        let permitted = SecureFunction::ALL.into_iter().collect();
        BenchContext {
            authority: AuthorityState::setup(params, &[DOT_ETA], permitted, &mut ChaCha20Rng::seed_from_u64(seed)),
        }
    }

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha20Rng) -> QuantTensor {
        let data = (0..rows * cols)
            .map(|_| rng.gen_range(-ENTRY_BOUND..=ENTRY_BOUND))
            .collect();
        QuantTensor::new(vec![rows, cols], 0, data).expect("consistent shape")
    }

    /// Milliseconds for one run of `op` over `size` elements. Input
    /// preparation is excluded.
    pub fn measure(&self, op: BenchOp, size: usize, workers: &Workers, seed: u64) -> Result<f64> {
        let pk = self.authority.public_keys();
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ size as u64);
        let codec = FixedPointCodec::default();
        let entries = Self::random_matrix(1, size, &mut rng);
        let operands = Self::random_matrix(1, size, &mut rng);
        match op {
            BenchOp::Enc => {
                let t = Instant::now();
                workers.try_map_seeded(size, &mut rng, |i, r| Ok(febo::encrypt(&pk.febo, entries.data[i], r)))?;
                Ok(ms(t))
            }
            BenchOp::Keyderive | BenchOp::DecAdd | BenchOp::DecMul => {
                let f = match op {
                    BenchOp::DecAdd => SecureFunction::Add,
                    BenchOp::DecMul => SecureFunction::Mul,
                    _ => SecureFunction::Sub,
                };
                let enc =
                    secure_matrix::pre_process_encryption(&entries, pk, Views::ElementOnly, &codec, &mut rng, workers)?;
                let t = Instant::now();
                let keys = secure_matrix::pre_process_key_derive(&operands, f, &self.authority, Some(&enc))?;
                if op == BenchOp::Keyderive {
                    return Ok(ms(t));
                }
                let bound = (ENTRY_BOUND * ENTRY_BOUND) as u64;
                let t = Instant::now();
                secure_matrix::secure_computation_bounded(&enc, f, &keys, &operands, pk, bound, workers)?;
                Ok(ms(t))
            }
            BenchOp::DecDot => {
                let x = Self::random_matrix(DOT_ETA, size, &mut rng);
                let y = Self::random_matrix(1, DOT_ETA, &mut rng);
                let enc = secure_matrix::pre_process_encryption(&x, pk, Views::DotOnly, &codec, &mut rng, workers)?;
                let keys =
                    secure_matrix::pre_process_key_derive(&y, SecureFunction::DotProduct, &self.authority, Some(&enc))?;
                let bound = DOT_ETA as u64 * (ENTRY_BOUND * ENTRY_BOUND) as u64;
                let t = Instant::now();
                secure_matrix::secure_computation_bounded(
                    &enc,
                    SecureFunction::DotProduct,
                    &keys,
                    &y,
                    pk,
                    bound,
                    workers,
                )?;
                Ok(ms(t))
            }
        }
    }

    /// Every combination of `ops × sizes × workers`. Sizes of zero are
    /// skipped. Each cell is the fastest of `repeats` runs.
    pub fn run(
        &self,
        ops: &[BenchOp],
        sizes: &[usize],
        workers: &[usize],
        repeats: usize,
        seed: u64,
    ) -> Result<Vec<BenchRow>> {
        let mut rows = Vec::new();
        if sizes.iter().all(|&s| s == 0) {
            return Ok(rows);
        }
        // warm the dlog tables so the first cell is not charged for them
        for op in ops {
            self.measure(*op, 1, &Workers::serial(), seed)?;
        }
        for &w in workers {
            if w == 0 {
                return Err(Error::InvalidParams("worker count must be at least 1".into()));
            }
            let pool = Workers::new(w);
            for &op in ops {
                for &size in sizes.iter().filter(|&&s| s > 0) {
                    let mut best = f64::INFINITY;
                    for _ in 0..repeats.max(1) {
                        best = best.min(self.measure(op, size, &pool, seed)?);
                    }
                    rows.push(BenchRow {
                        op,
                        size,
                        workers: w,
                        ms: best,
                    });
                }
            }
        }
        Ok(rows)
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

pub fn write_csv<W: Write>(out: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidParams(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::io("csv", e))?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<BenchRow>> {
    let mut r =
        csv::Reader::from_path(path).map_err(|e| Error::malformed(path.display().to_string(), e.to_string()))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::malformed(path.display().to_string(), e.to_string())))
        .collect()
}

/// Gnuplot script plotting time against size for one op per worker count.
pub fn gnuplot_script(csv_path: &str, rows: &[BenchRow]) -> String {
    let mut s = String::from("set datafile separator ','\nset key left top\nset xlabel 'elements'\nset ylabel 'ms'\n");
    let mut series = Vec::new();
    for r in rows {
        if !series.contains(&(r.op, r.workers)) {
            series.push((r.op, r.workers));
        }
    }
    let plots: Vec<String> = series
        .iter()
        .map(|(op, w)| {
            format!(
                "'{csv_path}' using (strcol(1) eq '{op}' && $3 == {w} ? $2 : 1/0):4 with linespoints title '{op} ({w} workers)'"
            )
        })
        .collect();
    if !plots.is_empty() {
        s.push_str("plot ");
        s.push_str(&plots.join(", \\\n     "));
        s.push('\n');
    }
    s
}

/// Least-squares line through `(x, y)`: `(slope, intercept, r²)`.
pub fn linear_fit_r2(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len().min(y.len()) as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}
