//! Functional encryption for one basic arithmetic operation `x op y`, where
//! `x` is encrypted and `y` is the key holder's plaintext operand.
//!
//! A ciphertext is `(cmt, ct) = (g^r, h^r g^x)`. Function keys are bound to a
//! single commitment:
//!
//! | op  | key                  | decrypt            |
//! |-----|----------------------|--------------------|
//! | add | `cmt^s · g^-y`       | `ct / sk`          |
//! | sub | `cmt^s · g^y`        | `ct / sk`          |
//! | mul | `(cmt^s)^y`          | `ct^y / sk`        |
//! | div | `(cmt^s)^(y^-1)`     | `ct^(y^-1) / sk`   |
//!
//! Division only decrypts when `y` divides `x`; otherwise the exponent is
//! `x · y^-1 mod p`, far outside any practical bound.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupParams, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasicOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BasicOp {
    pub const ALL: [BasicOp; 4] = [BasicOp::Add, BasicOp::Sub, BasicOp::Mul, BasicOp::Div];

    /// Plaintext reference semantics; `None` when the result is not an integer.
    pub fn apply(self, x: i64, y: i64) -> Option<i64> {
        match self {
            BasicOp::Add => x.checked_add(y),
            BasicOp::Sub => x.checked_sub(y),
            BasicOp::Mul => x.checked_mul(y),
            BasicOp::Div => (y != 0 && x % y == 0).then(|| x / y),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeboMpk {
    pub params: GroupParams,
    pub h: GroupElement,
}

/// Not `Serialize`, same rule as [`crate::feip::FeipMsk`].
#[derive(Clone)]
pub struct FeboMsk {
    params: GroupParams,
    s: Scalar,
}

impl FeboMsk {
    pub(crate) fn from_parts(params: GroupParams, s: Scalar) -> Self {
        FeboMsk { params, s }
    }

    pub(crate) fn secret(&self) -> &Scalar {
        &self.s
    }
}

impl fmt::Debug for FeboMsk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FeboMsk { s: <redacted> }")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeboCiphertext {
    pub cmt: GroupElement,
    pub ct: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeboFunctionKey {
    pub sk: GroupElement,
    pub op: BasicOp,
    pub y: i64,
    /// Commitment of the only ciphertext this key opens.
    pub cmt_ref: GroupElement,
}

pub fn setup<R: Rng + ?Sized>(params: &GroupParams, rng: &mut R) -> (FeboMpk, FeboMsk) {
    let s = params.sample_scalar(rng);
    let h = params.pow_scalar(params.generator(), &s);
    (
        FeboMpk {
            params: params.clone(),
            h,
        },
        FeboMsk {
            params: params.clone(),
            s,
        },
    )
}

pub fn encrypt<R: Rng + ?Sized>(mpk: &FeboMpk, x: i64, rng: &mut R) -> FeboCiphertext {
    let params = &mpk.params;
    let r = params.sample_scalar(rng);
    FeboCiphertext {
        cmt: params.pow_scalar(params.generator(), &r),
        ct: params.mul(&params.pow_scalar(&mpk.h, &r), &params.g_pow_i64(x)),
    }
}

fn inverse_operand(params: &GroupParams, y: i64) -> Result<Scalar> {
    params.scalar_inv(&params.scalar(y)).ok_or(Error::DivisorZero)
}

pub fn key_derive(msk: &FeboMsk, cmt: &GroupElement, op: BasicOp, y: i64) -> Result<FeboFunctionKey> {
    let params = &msk.params;
    let shared = params.pow_scalar(cmt, &msk.s);
    let sk = match op {
        BasicOp::Add => params.mul(&shared, &params.g_pow_i64(-y)),
        BasicOp::Sub => params.mul(&shared, &params.g_pow_i64(y)),
        BasicOp::Mul => params.pow_i64(&shared, y),
        BasicOp::Div => params.pow_scalar(&shared, &inverse_operand(params, y)?),
    };
    Ok(FeboFunctionKey {
        sk,
        op,
        y,
        cmt_ref: cmt.clone(),
    })
}

/// Recovers `x op y` provided the result lies in `[-bound, bound]`.
pub fn decrypt(
    mpk: &FeboMpk,
    fk: &FeboFunctionKey,
    ct: &FeboCiphertext,
    op: BasicOp,
    y: i64,
    bound: u64,
) -> Result<i64> {
    if fk.cmt_ref != ct.cmt {
        return Err(Error::KeyMismatch("FEBO key is bound to a different commitment".into()));
    }
    if fk.op != op || fk.y != y {
        return Err(Error::KeyMismatch(format!(
            "key issued for ({:?}, {}), used for ({op:?}, {y})",
            fk.op, fk.y
        )));
    }
    let params = &mpk.params;
    let lifted = match op {
        BasicOp::Add | BasicOp::Sub => ct.ct.clone(),
        BasicOp::Mul => params.pow_i64(&ct.ct, y),
        BasicOp::Div => params.pow_scalar(&ct.ct, &inverse_operand(params, y)?),
    };
    params.dlog(&params.div(&lifted, &fk.sk), bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::tests::test_params;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn round_trip(x: i64, op: BasicOp, y: i64, bound: u64) -> Result<i64> {
        let params = test_params(64);
        let mut rng = ChaCha20Rng::seed_from_u64((x as u64) ^ (y as u64).rotate_left(17));
        let (mpk, msk) = setup(&params, &mut rng);
        let ct = encrypt(&mpk, x, &mut rng);
        let fk = key_derive(&msk, &ct.cmt, op, y)?;
        decrypt(&mpk, &fk, &ct, op, y, bound)
    }

    #[test]
    fn setup_examples() {
        let params = test_params(64);
        let (mpk, msk) = setup(&params, &mut ChaCha20Rng::seed_from_u64(3));
        assert_eq!(params.pow_scalar(params.generator(), msk.secret()), mpk.h);
        let (again, _) = setup(&params, &mut ChaCha20Rng::seed_from_u64(3));
        assert_eq!(mpk, again);
        let (other, _) = setup(&params, &mut ChaCha20Rng::seed_from_u64(4));
        assert_ne!(mpk.h, other.h);
    }

    #[test]
    fn encrypt_examples() {
        let params = test_params(64);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (mpk, msk) = setup(&params, &mut rng);
        let ct = encrypt(&mpk, 0, &mut rng);
        // h^r = cmt^s
        assert_eq!(ct.ct, params.pow_scalar(&ct.cmt, msk.secret()));
        let a = encrypt(&mpk, 42, &mut rng);
        let b = encrypt(&mpk, 42, &mut rng);
        assert_ne!(a.cmt, b.cmt);
        for x in [-500, -1, 0, 1, 9999] {
            assert_eq!(round_trip(x, BasicOp::Add, 0, 10_000).unwrap(), x);
        }
    }

    #[test]
    fn key_derive_examples() {
        let params = test_params(64);
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let (mpk, msk) = setup(&params, &mut rng);
        let ct = encrypt(&mpk, 9, &mut rng);
        let shared = params.pow_scalar(&ct.cmt, msk.secret());
        assert_eq!(key_derive(&msk, &ct.cmt, BasicOp::Mul, 1).unwrap().sk, shared);
        assert_eq!(key_derive(&msk, &ct.cmt, BasicOp::Add, 0).unwrap().sk, shared);
        let fk = key_derive(&msk, &ct.cmt, BasicOp::Div, 3).unwrap();
        let inv3 = params.scalar_inv(&params.scalar(3)).unwrap();
        assert_eq!(fk.sk, params.pow_scalar(&shared, &inv3));
        assert_eq!(decrypt(&mpk, &fk, &ct, BasicOp::Div, 3, 100).unwrap(), 3);
        assert!(matches!(
            key_derive(&msk, &ct.cmt, BasicOp::Div, 0),
            Err(Error::DivisorZero)
        ));
    }

    #[test]
    fn decrypt_examples() {
        assert_eq!(round_trip(7, BasicOp::Add, 3, 100).unwrap(), 10);
        assert_eq!(round_trip(7, BasicOp::Sub, 3, 100).unwrap(), 4);
        assert_eq!(round_trip(7, BasicOp::Mul, 3, 100).unwrap(), 21);
        assert_eq!(round_trip(9, BasicOp::Div, 3, 100).unwrap(), 3);
        assert_eq!(round_trip(-12, BasicOp::Div, 4, 100).unwrap(), -3);
        assert_eq!(round_trip(-7, BasicOp::Mul, -3, 100).unwrap(), 21);
        assert!(matches!(
            round_trip(7, BasicOp::Div, 3, 1_000_000),
            Err(Error::NotInRange { .. })
        ));
    }

    #[test]
    fn keys_are_bound_to_commitment_and_operation() {
        let params = test_params(64);
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let (mpk, msk) = setup(&params, &mut rng);
        let ct1 = encrypt(&mpk, 5, &mut rng);
        let ct2 = encrypt(&mpk, 5, &mut rng);
        let fk = key_derive(&msk, &ct1.cmt, BasicOp::Sub, 2).unwrap();
        assert!(matches!(
            decrypt(&mpk, &fk, &ct2, BasicOp::Sub, 2, 100),
            Err(Error::KeyMismatch(_))
        ));
        assert!(matches!(
            decrypt(&mpk, &fk, &ct1, BasicOp::Add, 2, 100),
            Err(Error::KeyMismatch(_))
        ));
        assert!(matches!(
            decrypt(&mpk, &fk, &ct1, BasicOp::Sub, 3, 100),
            Err(Error::KeyMismatch(_))
        ));
        assert_eq!(decrypt(&mpk, &fk, &ct1, BasicOp::Sub, 2, 100).unwrap(), 3);
    }

    #[test]
    fn reference_semantics() {
        assert_eq!(BasicOp::Div.apply(7, 3), None);
        assert_eq!(BasicOp::Div.apply(7, 0), None);
        assert_eq!(BasicOp::Div.apply(-9, 3), Some(-3));
        assert_eq!(BasicOp::Sub.apply(3, 7), Some(-4));
    }
}
