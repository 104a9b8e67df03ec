//! Secure matrix computation between an encrypted matrix `X` (client data)
//! and a plaintext matrix `Y` (server model).
//!
//! `X` is encrypted twice: once column by column under FEIP for products
//! `Y · X`, and once element by element under FEBO for element-wise
//! operations. The server requests function keys for `Y` from the authority
//! and decrypts only the result.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::authority::{KeyRequest, KeyService, PublicKeys};
use crate::encoding::{FixedPointCodec, QuantTensor};
use crate::error::{Error, Result};
use crate::febo::{self, BasicOp, FeboCiphertext, FeboFunctionKey};
use crate::feip::{self, FeipCiphertext, FeipFunctionKey};
use crate::parallel::Workers;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecureFunction {
    DotProduct,
    Add,
    Sub,
    Mul,
    Div,
}

impl SecureFunction {
    pub const ALL: [SecureFunction; 5] = [
        SecureFunction::DotProduct,
        SecureFunction::Add,
        SecureFunction::Sub,
        SecureFunction::Mul,
        SecureFunction::Div,
    ];

    pub fn basic_op(self) -> Option<BasicOp> {
        match self {
            SecureFunction::DotProduct => None,
            SecureFunction::Add => Some(BasicOp::Add),
            SecureFunction::Sub => Some(BasicOp::Sub),
            SecureFunction::Mul => Some(BasicOp::Mul),
            SecureFunction::Div => Some(BasicOp::Div),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SecureFunction::DotProduct => "dot-product",
            SecureFunction::Add => "add",
            SecureFunction::Sub => "sub",
            SecureFunction::Mul => "mul",
            SecureFunction::Div => "div",
        }
    }
}

impl From<BasicOp> for SecureFunction {
    fn from(op: BasicOp) -> Self {
        match op {
            BasicOp::Add => SecureFunction::Add,
            BasicOp::Sub => SecureFunction::Sub,
            BasicOp::Mul => SecureFunction::Mul,
            BasicOp::Div => SecureFunction::Div,
        }
    }
}

impl std::str::FromStr for SecureFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SecureFunction::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown function {s:?}")))
    }
}

/// Which ciphertext views to produce.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Views {
    #[default]
    Both,
    /// Column FEIP ciphertexts only; element-wise functions become unavailable.
    DotOnly,
    /// Element ciphertexts only; the dot product becomes unavailable.
    ElementOnly,
}

/// An `rows × cols` integer matrix under both encryptions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncryptedMatrix {
    pub shape: [usize; 2],
    pub scale_power: u32,
    /// `col_cts[j]` encrypts column `j` (length `rows`). Empty under [`Views::ElementOnly`].
    #[serde(default)]
    pub col_cts: Vec<FeipCiphertext>,
    /// `elem_cts[i][j]` encrypts entry `(i, j)`. Empty under [`Views::DotOnly`].
    #[serde(default)]
    pub elem_cts: Vec<Vec<FeboCiphertext>>,
}

impl EncryptedMatrix {
    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    pub fn has_dot(&self) -> bool {
        !self.col_cts.is_empty() || self.cols() == 0
    }

    pub fn has_elementwise(&self) -> bool {
        !self.elem_cts.is_empty() || self.rows() * self.cols() == 0
    }

    /// Checks the internal shape invariants; used on anything read from disk.
    pub fn validate(&self) -> Result<()> {
        let [rows, cols] = self.shape;
        if (!self.col_cts.is_empty() && self.col_cts.len() != cols)
            || self.col_cts.iter().any(|c| c.eta != rows || c.ct.len() != rows)
        {
            return Err(Error::ShapeMismatch(format!(
                "column ciphertexts do not match shape {rows}x{cols}"
            )));
        }
        if !self.elem_cts.is_empty() && (self.elem_cts.len() != rows || self.elem_cts.iter().any(|r| r.len() != cols)) {
            return Err(Error::ShapeMismatch(format!(
                "element ciphertexts do not match shape {rows}x{cols}"
            )));
        }
        Ok(())
    }
}

/// Encrypts `x` (2-D, entries within the codec bound) under the requested views.
pub fn pre_process_encryption<R: Rng + ?Sized>(
    x: &QuantTensor,
    pk: &PublicKeys,
    views: Views,
    codec: &FixedPointCodec,
    rng: &mut R,
    workers: &Workers,
) -> Result<EncryptedMatrix> {
    let (rows, cols) = x.dims2()?;
    if let Some(&v) = x.data.iter().find(|v| v.abs() > codec.value_bound()) {
        return Err(Error::OutOfRange {
            value: codec.dequantize_value(v, x.scale_power),
            limit: codec.max_real(),
        });
    }
    let col_cts = match views {
        Views::ElementOnly => Vec::new(),
        Views::Both | Views::DotOnly => {
            let feip_mpk = pk.feip(rows)?;
            workers.try_map_seeded(cols, rng, |j, r| feip::encrypt(feip_mpk, &x.column(j), r))?
        }
    };
    let elem_cts = match views {
        Views::DotOnly => Vec::new(),
        Views::Both | Views::ElementOnly => {
            let flat =
                workers.try_map_seeded(rows * cols, rng, |idx, r| Ok(febo::encrypt(&pk.febo, x.data[idx], r)))?;
            let mut it = flat.into_iter();
            (0..rows).map(|_| it.by_ref().take(cols).collect()).collect()
        }
    };
    Ok(EncryptedMatrix {
        shape: [rows, cols],
        scale_power: x.scale_power,
        col_cts,
        elem_cts,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionKeyBatch {
    /// One key per row of `Y`.
    Dot { row_keys: Vec<FeipFunctionKey> },
    /// A key grid congruent to `Y`, each bound to one commitment.
    Elementwise {
        op: BasicOp,
        keys: Vec<Vec<FeboFunctionKey>>,
    },
}

impl FunctionKeyBatch {
    pub fn len(&self) -> usize {
        match self {
            FunctionKeyBatch::Dot { row_keys } => row_keys.len(),
            FunctionKeyBatch::Elementwise { keys, .. } => keys.iter().map(Vec::len).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn rows_of(y: &QuantTensor) -> Result<Vec<Vec<i64>>> {
    let (rows, _) = y.dims2()?;
    Ok((0..rows).map(|i| y.row(i).to_vec()).collect())
}

/// Requests the keys needed to evaluate `f` between `y` and `enc_ref`.
///
/// For the dot product `y` is `k × rows(X)`; for element-wise functions it
/// has the shape of `X` and the request carries `X`'s commitments.
pub fn pre_process_key_derive(
    y: &QuantTensor,
    f: SecureFunction,
    authority: &dyn KeyService,
    enc_ref: Option<&EncryptedMatrix>,
) -> Result<FunctionKeyBatch> {
    let (rows, cols) = y.dims2()?;
    let req = match f.basic_op() {
        None => {
            let eta = match enc_ref {
                Some(enc) if enc.rows() != cols => {
                    return Err(Error::ShapeMismatch(format!(
                        "Y has {cols} columns, X has {} rows",
                        enc.rows()
                    )))
                }
                Some(enc) => enc.rows(),
                None => cols,
            };
            KeyRequest::DotProduct { eta, rows: rows_of(y)? }
        }
        Some(op) => {
            let enc =
                enc_ref.ok_or_else(|| Error::ShapeMismatch("element-wise keys need the target ciphertexts".into()))?;
            if enc.shape != [rows, cols] {
                return Err(Error::ShapeMismatch(format!(
                    "Y is {rows}x{cols}, X is {}x{}",
                    enc.rows(),
                    enc.cols()
                )));
            }
            if !enc.has_elementwise() {
                return Err(Error::ShapeMismatch(
                    "X was encrypted without its element-wise view".into(),
                ));
            }
            let commitments = enc
                .elem_cts
                .iter()
                .map(|r| r.iter().map(|c| c.cmt.clone()).collect())
                .collect();
            KeyRequest::Elementwise {
                op,
                operands: rows_of(y)?,
                commitments,
            }
        }
    };
    Ok(authority.serve(&req)?.keys)
}

/// Evaluates `f` with dlog bounds derived from `codec`.
///
/// Dot product: `Z = Y · X`, `k × cols`, scale powers add. Element-wise:
/// `Z[i][j] = X[i][j] op Y[i][j]` with the same bookkeeping as
/// [`QuantTensor::elementwise`].
pub fn secure_computation(
    enc: &EncryptedMatrix,
    f: SecureFunction,
    keys: &FunctionKeyBatch,
    y: &QuantTensor,
    pk: &PublicKeys,
    codec: &FixedPointCodec,
    workers: &Workers,
) -> Result<QuantTensor> {
    let bound = match f.basic_op() {
        None => codec.dot_bound(enc.rows()),
        Some(op) => codec.elementwise_bound(op),
    };
    secure_computation_bounded(enc, f, keys, y, pk, bound, workers)
}

/// [`secure_computation`] with an explicit dlog bound.
pub fn secure_computation_bounded(
    enc: &EncryptedMatrix,
    f: SecureFunction,
    keys: &FunctionKeyBatch,
    y: &QuantTensor,
    pk: &PublicKeys,
    bound: u64,
    workers: &Workers,
) -> Result<QuantTensor> {
    let (rows, cols) = y.dims2()?;
    match (f.basic_op(), keys) {
        (None, FunctionKeyBatch::Dot { row_keys }) => {
            if cols != enc.rows() {
                return Err(Error::ShapeMismatch(format!(
                    "Y has {cols} columns, X has {} rows",
                    enc.rows()
                )));
            }
            if row_keys.len() != rows {
                return Err(Error::KeyMismatch(format!(
                    "{} row keys for {rows} rows",
                    row_keys.len()
                )));
            }
            if !enc.has_dot() {
                return Err(Error::ShapeMismatch("X was encrypted without its column view".into()));
            }
            let mpk = pk.feip(enc.rows())?;
            let out_cols = enc.cols();
            let data = workers.try_map_range(rows * out_cols, |idx| {
                let (i, j) = (idx / out_cols, idx % out_cols);
                feip::decrypt(mpk, &enc.col_cts[j], &row_keys[i], y.row(i), bound)
            })?;
            QuantTensor::new(vec![rows, out_cols], y.scale_power + enc.scale_power, data)
        }
        (Some(op), FunctionKeyBatch::Elementwise { op: key_op, keys }) => {
            if *key_op != op {
                return Err(Error::KeyMismatch(format!(
                    "keys issued for {key_op:?}, used for {op:?}"
                )));
            }
            if enc.shape != [rows, cols] {
                return Err(Error::ShapeMismatch(format!(
                    "Y is {rows}x{cols}, X is {}x{}",
                    enc.rows(),
                    enc.cols()
                )));
            }
            if !enc.has_elementwise() {
                return Err(Error::ShapeMismatch(
                    "X was encrypted without its element-wise view".into(),
                ));
            }
            if keys.len() != rows || keys.iter().any(|r| r.len() != cols) {
                return Err(Error::KeyMismatch("key grid is not congruent to Y".into()));
            }
            let data = workers.try_map_range(rows * cols, |idx| {
                let (i, j) = (idx / cols, idx % cols);
                febo::decrypt(&pk.febo, &keys[i][j], &enc.elem_cts[i][j], op, y.get(i, j), bound)
            })?;
            let scale_power = match op {
                BasicOp::Add | BasicOp::Sub => enc.scale_power,
                BasicOp::Mul => enc.scale_power + y.scale_power,
                BasicOp::Div => enc.scale_power.saturating_sub(y.scale_power),
            };
            QuantTensor::new(vec![rows, cols], scale_power, data)
        }
        _ => Err(Error::KeyMismatch(format!(
            "key batch does not match function {}",
            f.name()
        ))),
    }
}

/// Per-column inner products: `z[j] = <y[j], X[:, j]>`, one FEIP key per
/// column. `y` is `cols × rows`.
pub fn secure_column_dots(
    enc: &EncryptedMatrix,
    keys: &[FeipFunctionKey],
    y: &QuantTensor,
    pk: &PublicKeys,
    bound: u64,
    workers: &Workers,
) -> Result<Vec<i64>> {
    let (n, eta) = y.dims2()?;
    if n != enc.cols() || eta != enc.rows() {
        return Err(Error::ShapeMismatch(format!(
            "need one length-{} probe per column ({} columns), got {n}x{eta}",
            enc.rows(),
            enc.cols()
        )));
    }
    if keys.len() != n {
        return Err(Error::KeyMismatch(format!("{} keys for {n} columns", keys.len())));
    }
    if !enc.has_dot() {
        return Err(Error::ShapeMismatch("X was encrypted without its column view".into()));
    }
    let mpk = pk.feip(eta)?;
    workers.try_map_range(n, |j| feip::decrypt(mpk, &enc.col_cts[j], &keys[j], y.row(j), bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::authority::AuthorityState;
    use crate::group::tests::test_params;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn authority(etas: &[usize]) -> AuthorityState {
        AuthorityState::setup(
            &test_params(64),
            etas,
            SecureFunction::ALL.into_iter().collect(),
            &mut ChaCha20Rng::seed_from_u64(11),
        )
    }

    fn random(rows: usize, cols: usize, lim: i64, rng: &mut ChaCha20Rng) -> QuantTensor {
        let data = (0..rows * cols).map(|_| rng.gen_range(-lim..=lim)).collect();
        QuantTensor::new(vec![rows, cols], 1, data).unwrap()
    }

    #[test]
    fn encryption_bookkeeping() {
        let a = authority(&[3]);
        let codec = FixedPointCodec::default();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let x = random(3, 2, 50, &mut rng);
        let enc =
            pre_process_encryption(&x, a.public_keys(), Views::Both, &codec, &mut rng, &Workers::serial()).unwrap();
        assert_eq!(enc.col_cts.len(), 2);
        assert!(enc.col_cts.iter().all(|c| c.eta == 3));
        assert_eq!(enc.elem_cts.iter().map(Vec::len).sum::<usize>(), 6);
        enc.validate().unwrap();
        let dot = pre_process_encryption(
            &x,
            a.public_keys(),
            Views::DotOnly,
            &codec,
            &mut rng,
            &Workers::serial(),
        )
        .unwrap();
        assert!(!dot.has_elementwise());
        let big = QuantTensor::new(vec![3, 1], 1, vec![0, 30_000, 0]).unwrap();
        assert!(matches!(
            pre_process_encryption(&big, a.public_keys(), Views::Both, &codec, &mut rng, &Workers::serial()),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn identity_probe_and_oracles() {
        let a = authority(&[3]);
        let pk = a.public_keys();
        let codec = FixedPointCodec::default();
        let w = Workers::serial();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let x = random(3, 2, 100, &mut rng);
        let enc = pre_process_encryption(&x, pk, Views::Both, &codec, &mut rng, &w).unwrap();

        let mut eye = QuantTensor::zeros(vec![3, 3], 1);
        for i in 0..3 {
            eye.data[i * 3 + i] = 100;
        }
        let keys = pre_process_key_derive(&eye, SecureFunction::DotProduct, &a, Some(&enc)).unwrap();
        assert_eq!(keys.len(), 3);
        let z = secure_computation(&enc, SecureFunction::DotProduct, &keys, &eye, pk, &codec, &w).unwrap();
        assert_eq!(z.data, x.map(|v| 100 * v).data);
        assert_eq!(z.scale_power, 2);

        let y = random(2, 3, 50, &mut rng);
        let keys = pre_process_key_derive(&y, SecureFunction::DotProduct, &a, Some(&enc)).unwrap();
        let z = secure_computation(&enc, SecureFunction::DotProduct, &keys, &y, pk, &codec, &w).unwrap();
        assert_eq!(z, y.matmul(&x).unwrap());

        let y = random(3, 2, 100, &mut rng);
        let keys = pre_process_key_derive(&y, SecureFunction::Sub, &a, Some(&enc)).unwrap();
        assert_eq!(keys.len(), 6);
        let z = secure_computation(&enc, SecureFunction::Sub, &keys, &y, pk, &codec, &w).unwrap();
        assert_eq!(Some(z), x.elementwise(BasicOp::Sub, &y).unwrap());
    }

    #[test]
    fn zero_matrix_decrypts_to_zero() {
        let a = authority(&[4]);
        let pk = a.public_keys();
        let codec = FixedPointCodec::default();
        let w = Workers::serial();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let x = QuantTensor::zeros(vec![4, 4], 1);
        let enc = pre_process_encryption(&x, pk, Views::Both, &codec, &mut rng, &w).unwrap();
        let y = random(4, 4, 100, &mut rng);
        for f in [SecureFunction::DotProduct, SecureFunction::Mul] {
            let keys = pre_process_key_derive(&y, f, &a, Some(&enc)).unwrap();
            let z = secure_computation(&enc, f, &keys, &y, pk, &codec, &w).unwrap();
            assert!(z.data.iter().all(|&v| v == 0));
        }
    }

    #[test]
    fn keys_do_not_transfer_between_matrices() {
        let a = authority(&[2]);
        let pk = a.public_keys();
        let codec = FixedPointCodec::default();
        let w = Workers::serial();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let x = random(2, 2, 10, &mut rng);
        let enc1 = pre_process_encryption(&x, pk, Views::Both, &codec, &mut rng, &w).unwrap();
        let enc2 = pre_process_encryption(&x, pk, Views::Both, &codec, &mut rng, &w).unwrap();
        let y = random(2, 2, 10, &mut rng);
        let keys = pre_process_key_derive(&y, SecureFunction::Add, &a, Some(&enc1)).unwrap();
        assert!(matches!(
            secure_computation(&enc2, SecureFunction::Add, &keys, &y, pk, &codec, &w),
            Err(Error::KeyMismatch(_))
        ));
        assert!(matches!(
            secure_computation(&enc1, SecureFunction::Mul, &keys, &y, pk, &codec, &w),
            Err(Error::KeyMismatch(_))
        ));
    }

    #[test]
    fn shape_and_permission_errors() {
        let a = authority(&[3]);
        let pk = a.public_keys();
        let codec = FixedPointCodec::default();
        let w = Workers::serial();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let x = random(3, 2, 10, &mut rng);
        let enc = pre_process_encryption(&x, pk, Views::Both, &codec, &mut rng, &w).unwrap();
        let bad = random(2, 2, 10, &mut rng);
        assert!(matches!(
            pre_process_key_derive(&bad, SecureFunction::DotProduct, &a, Some(&enc)),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            pre_process_key_derive(&bad, SecureFunction::Sub, &a, Some(&enc)),
            Err(Error::ShapeMismatch(_))
        ));
        assert!(matches!(
            pre_process_key_derive(&bad, SecureFunction::Sub, &a, None),
            Err(Error::ShapeMismatch(_))
        ));
        let limited = AuthorityState::setup(
            &test_params(64),
            &[3],
            [SecureFunction::DotProduct].into_iter().collect(),
            &mut rng,
        );
        let enc = pre_process_encryption(&x, limited.public_keys(), Views::Both, &codec, &mut rng, &w).unwrap();
        assert!(matches!(
            pre_process_key_derive(&x, SecureFunction::Mul, &limited, Some(&enc)),
            Err(Error::UnsupportedFunction(SecureFunction::Mul))
        ));
    }

    #[test]
    fn dot_product_matches_febo_mul_then_sum() {
        let a = authority(&[4]);
        let pk = a.public_keys();
        let codec = FixedPointCodec::default();
        let w = Workers::serial();
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let x = random(4, 3, 100, &mut rng);
        let enc = pre_process_encryption(&x, pk, Views::Both, &codec, &mut rng, &w).unwrap();
        let probe = random(1, 4, 100, &mut rng);
        let keys = pre_process_key_derive(&probe, SecureFunction::DotProduct, &a, Some(&enc)).unwrap();
        let via_feip = secure_computation(&enc, SecureFunction::DotProduct, &keys, &probe, pk, &codec, &w).unwrap();
        // broadcast the probe across columns and sum the FEBO products
        let spread = QuantTensor::new(vec![4, 3], 1, (0..12).map(|idx| probe.data[idx / 3]).collect()).unwrap();
        let keys = pre_process_key_derive(&spread, SecureFunction::Mul, &a, Some(&enc)).unwrap();
        let prod = secure_computation(&enc, SecureFunction::Mul, &keys, &spread, pk, &codec, &w).unwrap();
        let summed: Vec<i64> = (0..3).map(|j| prod.column(j).iter().sum()).collect();
        assert_eq!(via_feip.data, summed);
    }

    #[test]
    fn parallel_and_serial_agree() {
        let a = authority(&[5]);
        let pk = a.public_keys();
        let codec = FixedPointCodec::default();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let x = random(5, 6, 100, &mut rng);
        let enc = pre_process_encryption(&x, pk, Views::Both, &codec, &mut rng, &Workers::serial()).unwrap();
        let y = random(4, 5, 100, &mut rng);
        let keys = pre_process_key_derive(&y, SecureFunction::DotProduct, &a, Some(&enc)).unwrap();
        let serial = secure_computation(
            &enc,
            SecureFunction::DotProduct,
            &keys,
            &y,
            pk,
            &codec,
            &Workers::serial(),
        );
        let par = secure_computation(
            &enc,
            SecureFunction::DotProduct,
            &keys,
            &y,
            pk,
            &codec,
            &Workers::new(4),
        );
        assert_eq!(serial.unwrap(), par.unwrap());
    }

    #[test]
    fn column_dots() {
        let a = authority(&[3]);
        let pk = a.public_keys();
        let codec = FixedPointCodec::default();
        let w = Workers::serial();
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let x = random(3, 4, 100, &mut rng);
        let enc = pre_process_encryption(&x, pk, Views::DotOnly, &codec, &mut rng, &w).unwrap();
        let y = random(4, 3, 100, &mut rng);
        let keys: Vec<_> = (0..4)
            .map(|j| {
                let row = QuantTensor::new(vec![1, 3], 1, y.row(j).to_vec()).unwrap();
                match pre_process_key_derive(&row, SecureFunction::DotProduct, &a, Some(&enc)).unwrap() {
                    FunctionKeyBatch::Dot { mut row_keys } => row_keys.remove(0),
                    _ => unreachable!(),
                }
            })
            .collect();
        let z = secure_column_dots(&enc, &keys, &y, pk, codec.dot_bound(3), &w).unwrap();
        let expected: Vec<i64> = (0..4)
            .map(|j| x.column(j).iter().zip(y.row(j)).map(|(a, b)| a * b).sum())
            .collect();
        assert_eq!(z, expected);
    }

    #[test]
    fn encrypted_matrix_json_round_trip() {
        let a = authority(&[2]);
        let codec = FixedPointCodec::default();
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let x = random(2, 2, 10, &mut rng);
        let enc =
            pre_process_encryption(&x, a.public_keys(), Views::Both, &codec, &mut rng, &Workers::serial()).unwrap();
        let json = serde_json::to_string(&enc).unwrap();
        let back: EncryptedMatrix = serde_json::from_str(&json).unwrap();
        back.validate().unwrap();
        assert_eq!(back, enc);
    }
}
