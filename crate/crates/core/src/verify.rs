//! Randomized oracle suites: every secure result is compared against the
//! same computation on plaintext integers.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::authority::{AuthorityState, KeyRequest, KeyService};
use crate::encoding::{FixedPointCodec, QuantTensor};
use crate::error::{Error, Result};
use crate::febo::{self, BasicOp};
use crate::feip;
use crate::group::{GroupElement, GroupParams};
use crate::parallel::Workers;
use crate::secure_conv::{self, ConvSpec};
use crate::secure_matrix::{self, EncryptedMatrix, FunctionKeyBatch, SecureFunction, Views};

pub const FEIP_ENTRY_BOUND: i64 = 100;
pub const FEBO_ENTRY_BOUND: i64 = 10_000;
/// Largest window any generated convolution can have (3·3·2).
const MAX_WINDOW: usize = 18;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Trials per suite (per operation for the element-wise suite).
    pub trials: usize,
    /// Largest vector length / matrix side.
    pub max_dim: usize,
    pub seed: u64,
    /// Flip one bit of one ciphertext in every trial.
    pub inject_fault: bool,
    pub workers: Workers,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            trials: 100,
            max_dim: 16,
            seed: 0,
            inject_fault: false,
            workers: Workers::serial(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl SuiteReport {
    fn new(name: impl Into<String>) -> Self {
        SuiteReport {
            name: name.into(),
            trials: 0,
            failures: 0,
            first_failure: None,
        }
    }

    fn record(&mut self, outcome: std::result::Result<(), String>) {
        self.trials += 1;
        if let Err(msg) = outcome {
            self.failures += 1;
            self.first_failure.get_or_insert(msg);
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {:<16} {}/{} trials",
            self.name,
            self.trials - self.failures,
            self.trials
        )?;
        if let Some(msg) = &self.first_failure {
            write!(f, "  first failure: {msg}")?;
        }
        Ok(())
    }
}

fn tamper(e: &mut GroupElement) {
    *e = GroupElement::from_raw(e.value() ^ num_bigint::BigUint::from(1u8));
}

fn compare(got: Result<i64>, want: i64, what: impl fmt::Display) -> std::result::Result<(), String> {
    match got {
        Ok(v) if v == want => Ok(()),
        Ok(v) => Err(format!("{what}: got {v}, expected {want}")),
        Err(e) => Err(format!("{what}: {e}")),
    }
}

fn compare_tensor(
    got: Result<QuantTensor>,
    want: &QuantTensor,
    what: impl fmt::Display,
) -> std::result::Result<(), String> {
    match got {
        Ok(t) if t.data == want.data && t.shape == want.shape => Ok(()),
        Ok(_) => Err(format!("{what}: result differs from the plaintext oracle")),
        Err(e) => Err(format!("{what}: {e}")),
    }
}

fn random_vec(rng: &mut ChaCha20Rng, n: usize, bound: i64) -> Vec<i64> {
    (0..n).map(|_| rng.gen_range(-bound..=bound)).collect()
}

fn random_matrix(rng: &mut ChaCha20Rng, rows: usize, cols: usize, bound: i64) -> QuantTensor {
    QuantTensor::new(vec![rows, cols], 0, random_vec(rng, rows * cols, bound)).expect("consistent shape")
}

/// Runs the four suites against a fresh authority in `params`.
pub struct Verifier {
    authority: AuthorityState,
    opts: VerifyOptions,
}

impl Verifier {
    pub fn new(params: &GroupParams, opts: VerifyOptions) -> Result<Self> {
        if opts.max_dim == 0 {
            return Err(Error::InvalidParams("max dimension must be at least 1".into()));
        }
        let etas: Vec<usize> = (1..=opts.max_dim.max(MAX_WINDOW)).collect();
        let permitted = SecureFunction::ALL.into_iter().collect();
        let authority = AuthorityState::setup(params, &etas, permitted, &mut ChaCha20Rng::seed_from_u64(opts.seed));
        Ok(Verifier { authority, opts })
    }

    fn rng(&self, suite: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(self.opts.seed.wrapping_mul(31).wrapping_add(suite))
    }

    pub fn run_all(&self) -> Vec<SuiteReport> {
        vec![self.feip(), self.febo(), self.secure_matrix(), self.secure_conv()]
    }

    /// Inner products of random vectors of length `1..=max_dim`.
    pub fn feip(&self) -> SuiteReport {
        let mut report = SuiteReport::new("feip");
        let mut rng = self.rng(1);
        let pk = self.authority.public_keys();
        for t in 0..self.opts.trials {
            let eta = rng.gen_range(1..=self.opts.max_dim);
            let x = random_vec(&mut rng, eta, FEIP_ENTRY_BOUND);
            let y = random_vec(&mut rng, eta, FEIP_ENTRY_BOUND);
            let want: i64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let outcome = (|| {
                let mpk = pk.feip(eta)?;
                let mut ct = feip::encrypt(mpk, &x, &mut rng)?;
                if self.opts.inject_fault {
                    tamper(&mut ct.ct[0]);
                }
                let keys = self
                    .authority
                    .serve(&KeyRequest::DotProduct {
                        eta,
                        rows: vec![y.clone()],
                    })?
                    .keys;
                let FunctionKeyBatch::Dot { row_keys } = keys else {
                    return Err(Error::MalformedRequest("unexpected key kind".into()));
                };
                let bound = eta as u64 * (FEIP_ENTRY_BOUND * FEIP_ENTRY_BOUND) as u64;
                feip::decrypt(mpk, &ct, &row_keys[0], &y, bound)
            })();
            report.record(compare(outcome, want, format_args!("trial {t}, eta {eta}")));
        }
        report
    }

    /// Each basic operation on random scalars; division on exact multiples.
    pub fn febo(&self) -> SuiteReport {
        let mut report = SuiteReport::new("febo");
        let mut rng = self.rng(2);
        let pk = self.authority.public_keys();
        let b = FEBO_ENTRY_BOUND;
        for op in BasicOp::ALL {
            for t in 0..self.opts.trials {
                let (x, y) = if op == BasicOp::Div {
                    let y = loop {
                        let y = rng.gen_range(-100..=100);
                        if y != 0 {
                            break y;
                        }
                    };
                    (y * rng.gen_range(-b / 100..=b / 100), y)
                } else {
                    (rng.gen_range(-b..=b), rng.gen_range(-b..=b))
                };
                let want = op.apply(x, y).expect("exact by construction");
                let bound = want.unsigned_abs().max(1).max(match op {
                    BasicOp::Mul => (b * b) as u64,
                    _ => 2 * b as u64,
                });
                let outcome = (|| {
                    let mut ct = febo::encrypt(&pk.febo, x, &mut rng);
                    let req = KeyRequest::Elementwise {
                        op,
                        operands: vec![vec![y]],
                        commitments: vec![vec![ct.cmt.clone()]],
                    };
                    let FunctionKeyBatch::Elementwise { keys, .. } = self.authority.serve(&req)?.keys else {
                        return Err(Error::MalformedRequest("unexpected key kind".into()));
                    };
                    if self.opts.inject_fault {
                        tamper(&mut ct.ct);
                    }
                    febo::decrypt(&pk.febo, &keys[0][0], &ct, op, y, bound)
                })();
                report.record(compare(outcome, want, format_args!("{op:?} trial {t}, {x} and {y}")));
            }
        }
        report
    }

    /// Dot product and element-wise add/sub/mul on matrices up to `max_dim` square.
    pub fn secure_matrix(&self) -> SuiteReport {
        let mut report = SuiteReport::new("secure-matrix");
        let mut rng = self.rng(3);
        let pk = self.authority.public_keys();
        let codec = FixedPointCodec::default();
        let b = FEIP_ENTRY_BOUND;
        for f in [
            SecureFunction::DotProduct,
            SecureFunction::Add,
            SecureFunction::Sub,
            SecureFunction::Mul,
        ] {
            for t in 0..self.opts.trials {
                let rows = rng.gen_range(1..=self.opts.max_dim);
                let cols = rng.gen_range(1..=self.opts.max_dim);
                let x = random_matrix(&mut rng, rows, cols, b);
                let (y, want, bound) = match f.basic_op() {
                    None => {
                        let k = rng.gen_range(1..=self.opts.max_dim);
                        let y = random_matrix(&mut rng, k, rows, b);
                        let want = y.matmul(&x).expect("conformant");
                        (y, want, rows as u64 * (b * b) as u64)
                    }
                    Some(op) => {
                        let y = random_matrix(&mut rng, rows, cols, b);
                        let want = x.elementwise(op, &y).expect("same shape").expect("exact");
                        let bound = if op == BasicOp::Mul {
                            (b * b) as u64
                        } else {
                            2 * b as u64
                        };
                        (y, want, bound)
                    }
                };
                let views = if f == SecureFunction::DotProduct {
                    Views::DotOnly
                } else {
                    Views::ElementOnly
                };
                let outcome = (|| {
                    let mut enc: EncryptedMatrix =
                        secure_matrix::pre_process_encryption(&x, pk, views, &codec, &mut rng, &self.opts.workers)?;
                    let keys = secure_matrix::pre_process_key_derive(&y, f, &self.authority, Some(&enc))?;
                    if self.opts.inject_fault {
                        match views {
                            Views::DotOnly => tamper(&mut enc.col_cts[0].ct[0]),
                            _ => tamper(&mut enc.elem_cts[0][0].ct),
                        }
                    }
                    secure_matrix::secure_computation_bounded(&enc, f, &keys, &y, pk, bound, &self.opts.workers)
                })();
                report.record(compare_tensor(
                    outcome,
                    &want,
                    format_args!("{} trial {t}, {rows}x{cols}", f.name()),
                ));
            }
        }
        report
    }

    fn random_spec(rng: &mut ChaCha20Rng) -> ConvSpec {
        loop {
            let h = rng.gen_range(2..=6);
            let w = rng.gen_range(2..=6);
            let c = rng.gen_range(1..=2);
            let size = rng.gen_range(1..=3);
            let padding = rng.gen_range(0..=1);
            let stride = *[1, 2].choose(rng).expect("non-empty");
            let filters = rng.gen_range(1..=3);
            if let Ok(spec) = ConvSpec::new([h, w, c], size, padding, stride, filters) {
                return spec;
            }
        }
    }

    /// Random small convolution geometries against the direct loop.
    pub fn secure_conv(&self) -> SuiteReport {
        let mut report = SuiteReport::new("secure-conv");
        let mut rng = self.rng(4);
        let pk = self.authority.public_keys();
        let codec = FixedPointCodec::new(0, FEIP_ENTRY_BOUND).expect("valid codec");
        for t in 0..self.opts.trials {
            let spec = Self::random_spec(&mut rng);
            let image = QuantTensor::new(
                vec![spec.height, spec.width, spec.channels],
                0,
                random_vec(&mut rng, spec.input_len(), FEIP_ENTRY_BOUND),
            )
            .expect("consistent shape");
            let kernels: Vec<QuantTensor> = (0..spec.filters)
                .map(|_| {
                    QuantTensor::new(
                        vec![spec.window_len()],
                        0,
                        random_vec(&mut rng, spec.window_len(), FEIP_ENTRY_BOUND),
                    )
                    .expect("consistent shape")
                })
                .collect();
            let want = secure_conv::plain_convolution(&image, &kernels, &spec);
            let outcome = (|| {
                let mut enc = secure_conv::pre_process_encryption(&image, &spec, pk, &mut rng, &self.opts.workers)?;
                let keys = secure_conv::pre_process_key_derive_multi(&kernels, &spec, &self.authority)?;
                if self.opts.inject_fault {
                    tamper(&mut enc.windows[0].ct[0]);
                }
                secure_conv::secure_convolution_multi(&enc, &keys, &kernels, pk, &codec, &self.opts.workers)
            })();
            let what = format!(
                "trial {t}, {}x{}x{} k{} p{} s{} f{}",
                spec.height, spec.width, spec.channels, spec.size, spec.padding, spec.stride, spec.filters
            );
            match want {
                Ok(want) => report.record(compare_tensor(outcome, &want, what)),
                Err(e) => report.record(Err(format!("{what}: oracle failed: {e}"))),
            }
        }
        report
    }
}
