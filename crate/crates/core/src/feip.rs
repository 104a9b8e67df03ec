//! Functional encryption for inner products over a DDH group.
//!
//! `Setup` publishes `h_i = g^{s_i}`, a function key for `y` is the scalar
//! `<y, s> mod p`, and decryption recovers `g^{<x, y>}` from which the
//! bounded discrete log yields the inner product.

use std::fmt;

use num_bigint::BigInt;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupParams, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeipMpk {
    pub params: GroupParams,
    pub h: Vec<GroupElement>,
}

/// Master secret `s`. Deliberately not `Serialize`: it can only leave the
/// authority through [`crate::authority::AuthorityState::save_secret`].
#[derive(Clone)]
pub struct FeipMsk {
    params: GroupParams,
    s: Vec<Scalar>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeipFunctionKey {
    pub sk: Scalar,
    /// The vector this key was derived for.
    pub y: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeipCiphertext {
    pub eta: usize,
    pub ct0: GroupElement,
    pub ct: Vec<GroupElement>,
}

impl FeipMpk {
    pub fn eta(&self) -> usize {
        self.h.len()
    }
}

impl FeipMsk {
    pub fn eta(&self) -> usize {
        self.s.len()
    }

    pub(crate) fn from_parts(params: GroupParams, s: Vec<Scalar>) -> Self {
        FeipMsk { params, s }
    }

    pub(crate) fn secrets(&self) -> &[Scalar] {
        &self.s
    }
}

impl fmt::Debug for FeipMsk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FeipMsk {{ eta: {}, s: <redacted> }}", self.s.len())
    }
}

pub fn setup<R: Rng + ?Sized>(params: &GroupParams, eta: usize, rng: &mut R) -> (FeipMpk, FeipMsk) {
    assert!(eta >= 1, "FEIP vector length must be positive");
    let s: Vec<Scalar> = (0..eta).map(|_| params.sample_scalar(rng)).collect();
    let h = s.iter().map(|si| params.pow_scalar(params.generator(), si)).collect();
    (
        FeipMpk {
            params: params.clone(),
            h,
        },
        FeipMsk {
            params: params.clone(),
            s,
        },
    )
}

/// `sk = <y, s> mod p`. Negative components are reduced mod `p`.
pub fn key_derive(msk: &FeipMsk, y: &[i64]) -> Result<FeipFunctionKey> {
    if y.len() != msk.s.len() {
        return Err(Error::LengthMismatch {
            expected: msk.s.len(),
            actual: y.len(),
        });
    }
    let acc = y.iter().zip(&msk.s).fold(BigInt::from(0), |acc, (&yi, si)| {
        acc + BigInt::from(yi) * BigInt::from(si.value().clone())
    });
    Ok(FeipFunctionKey {
        sk: msk.params.reduce(&acc),
        y: y.to_vec(),
    })
}

pub fn encrypt<R: Rng + ?Sized>(mpk: &FeipMpk, x: &[i64], rng: &mut R) -> Result<FeipCiphertext> {
    if x.len() != mpk.eta() {
        return Err(Error::LengthMismatch {
            expected: mpk.eta(),
            actual: x.len(),
        });
    }
    let params = &mpk.params;
    let r = params.sample_scalar(rng);
    let ct0 = params.pow_scalar(params.generator(), &r);
    let ct = mpk
        .h
        .iter()
        .zip(x)
        .map(|(hi, &xi)| params.mul(&params.pow_scalar(hi, &r), &params.g_pow_i64(xi)))
        .collect();
    Ok(FeipCiphertext {
        eta: mpk.eta(),
        ct0,
        ct,
    })
}

/// Recovers `<x, y>` provided `|<x, y>| <= bound`.
pub fn decrypt(mpk: &FeipMpk, ct: &FeipCiphertext, fk: &FeipFunctionKey, y: &[i64], bound: u64) -> Result<i64> {
    let eta = mpk.eta();
    if ct.eta != eta || ct.ct.len() != eta {
        return Err(Error::LengthMismatch {
            expected: eta,
            actual: ct.ct.len(),
        });
    }
    if y.len() != eta {
        return Err(Error::LengthMismatch {
            expected: eta,
            actual: y.len(),
        });
    }
    if fk.y != y {
        return Err(Error::KeyMismatch("FEIP key was derived for a different vector".into()));
    }
    let params = &mpk.params;
    let numerator = params.multi_pow_i64(&ct.ct, y);
    let mask = params.pow_scalar(&ct.ct0, &fk.sk);
    params.dlog(&params.div(&numerator, &mask), bound)
}
