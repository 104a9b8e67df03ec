//! Prime-order subgroup of `Z_r^*` for a safe prime `r = 2p + 1`, plus
//! bounded discrete-log recovery.
//!
//! Both functional-encryption schemes work in the order-`p` subgroup of
//! quadratic residues. Exponents are reduced modulo the group order `p`,
//! element arithmetic is modulo `r`.
//!
//! Small security parameters (32/64 bits) are accepted so tests run fast.
//! They are NOT secure.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Security parameter used by default, in bits of the group order.
pub const DEFAULT_LAMBDA: u32 = 256;

const MILLER_RABIN_ROUNDS: usize = 40;

/// Description of the cyclic group shared by FEIP and FEBO.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupParams {
    pub lambda: u32,
    #[serde(with = "hex")]
    pub modulus: BigUint,
    #[serde(with = "hex")]
    pub order: BigUint,
    pub generator: GroupElement,
}

/// An element of the order-`p` subgroup, stored as its residue mod `r`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(#[serde(with = "hex")] BigUint);

/// An exponent in `[0, p - 1]`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Scalar(#[serde(with = "hex")] BigUint);

impl GroupElement {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    /// Wraps a raw residue. Membership is not checked here; use
    /// [`GroupParams::contains`] on untrusted input.
    pub fn from_raw(value: BigUint) -> Self {
        GroupElement(value)
    }

    fn fingerprint(&self) -> u64 {
        self.0.iter_u64_digits().next().unwrap_or(0)
    }
}

impl Scalar {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElement(0x{:x})", self.0)
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar(0x{:x})", self.0)
    }
}

impl fmt::Debug for GroupParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupParams")
            .field("lambda", &self.lambda)
            .field("modulus", &format_args!("0x{:x}", self.modulus))
            .field("order", &format_args!("0x{:x}", self.order))
            .field("generator", &self.generator)
            .finish()
    }
}

/// Generates group parameters with a `lambda`-bit prime order.
///
/// With `seed = Some(_)` the output is a pure function of `(lambda, seed)`;
/// otherwise the OS entropy source is used.
pub fn group_gen(lambda: u32, seed: Option<u64>) -> GroupParams {
    match seed {
        Some(seed) => GroupParams::generate(lambda, &mut ChaCha20Rng::seed_from_u64(seed)),
        None => GroupParams::generate(lambda, &mut ChaCha20Rng::from_entropy()),
    }
}

impl GroupParams {
    /// Safe-prime search: `p` of exactly `lambda` bits with `2p + 1` prime,
    /// generator `g = h^2` for a random `h`.
    pub fn generate<R: Rng + ?Sized>(lambda: u32, rng: &mut R) -> Self {
        assert!(lambda >= 32, "lambda must be at least 32 bits");
        let small = small_primes();
        let (order, modulus) = loop {
            let mut p = rng.gen_biguint(lambda as u64);
            p.set_bit(lambda as u64 - 1, true);
            p.set_bit(0, true);
            // Sieve both p and 2p + 1 before any modular exponentiation.
            let sieved = small.iter().all(|&q| {
                let rem = (&p % q).to_u32().unwrap_or(0);
                rem != 0 && !(2 * rem as u64 + 1).is_multiple_of(q as u64)
            });
            if !sieved {
                continue;
            }
            if !is_probable_prime(&p, MILLER_RABIN_ROUNDS, rng) {
                continue;
            }
            let r: BigUint = (&p << 1u32) + 1u32;
            if is_probable_prime(&r, MILLER_RABIN_ROUNDS, rng) {
                break (p, r);
            }
        };
        let two = BigUint::from(2u32);
        let upper = &modulus - 1u32;
        let generator = loop {
            let h = rng.gen_biguint_range(&two, &upper);
            let g = h.modpow(&two, &modulus);
            if !g.is_one() {
                break g;
            }
        };
        GroupParams {
            lambda,
            modulus,
            order,
            generator: GroupElement(generator),
        }
    }

    /// Checks every structural invariant. Intended for parameters read from disk.
    pub fn validate(&self) -> Result<()> {
        let mut rng = ChaCha20Rng::seed_from_u64(0x0067_726f_7570);
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if self.order.bits() != self.lambda as u64 {
            return bad("order bit length differs from lambda");
        }
        if self.modulus != (&self.order << 1u32) + 1u32 {
            return bad("modulus is not 2 * order + 1");
        }
        if !is_probable_prime(&self.order, MILLER_RABIN_ROUNDS, &mut rng)
            || !is_probable_prime(&self.modulus, MILLER_RABIN_ROUNDS, &mut rng)
        {
            return bad("order or modulus is composite");
        }
        if self.generator.0.is_one() || !self.contains(&self.generator) {
            return bad("generator does not have order p");
        }
        Ok(())
    }

    pub fn generator(&self) -> &GroupElement {
        &self.generator
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(BigUint::one())
    }

    /// Subgroup membership: `0 < x < r` and `x^p = 1`.
    pub fn contains(&self, x: &GroupElement) -> bool {
        !x.0.is_zero() && x.0 < self.modulus && x.0.modpow(&self.order, &self.modulus).is_one()
    }

    /// Size of a serialized element, in bytes.
    pub fn element_bytes(&self) -> usize {
        self.modulus.bits().div_ceil(8) as usize
    }

    /// Size of a serialized scalar, in bytes.
    pub fn scalar_bytes(&self) -> usize {
        self.order.bits().div_ceil(8) as usize
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement((&a.0 * &b.0) % &self.modulus)
    }

    pub fn div(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.mul(a, &self.inv(b))
    }

    pub fn inv(&self, a: &GroupElement) -> GroupElement {
        // Elements of the subgroup are units mod r.
        GroupElement(a.0.modinv(&self.modulus).expect("group element is invertible"))
    }

    /// `base^e` for a signed exponent, reduced mod `p` first.
    pub fn pow(&self, base: &GroupElement, e: &BigInt) -> GroupElement {
        let reduced = self.reduce(e);
        self.pow_scalar(base, &reduced)
    }

    pub fn pow_scalar(&self, base: &GroupElement, e: &Scalar) -> GroupElement {
        GroupElement(base.0.modpow(&e.0, &self.modulus))
    }

    pub fn pow_i64(&self, base: &GroupElement, e: i64) -> GroupElement {
        let magnitude = BigUint::from(e.unsigned_abs());
        let raised = GroupElement(base.0.modpow(&magnitude, &self.modulus));
        if e < 0 {
            self.inv(&raised)
        } else {
            raised
        }
    }

    /// `g^e` for a small signed exponent.
    pub fn g_pow_i64(&self, e: i64) -> GroupElement {
        self.pow_i64(&self.generator, e)
    }

    /// `Π bases[i]^exps[i]` by simultaneous square-and-multiply. Positive and
    /// negative exponents accumulate separately so only one inversion is paid.
    pub fn multi_pow_i64(&self, bases: &[GroupElement], exps: &[i64]) -> GroupElement {
        debug_assert_eq!(bases.len(), exps.len());
        let max_bits = exps
            .iter()
            .map(|e| 64 - e.unsigned_abs().leading_zeros())
            .max()
            .unwrap_or(0);
        let mut pos = BigUint::one();
        let mut neg = BigUint::one();
        let mut neg_used = false;
        for bit in (0..max_bits).rev() {
            pos = (&pos * &pos) % &self.modulus;
            if neg_used {
                neg = (&neg * &neg) % &self.modulus;
            }
            for (base, &e) in bases.iter().zip(exps) {
                if (e.unsigned_abs() >> bit) & 1 == 1 {
                    if e > 0 {
                        pos = (&pos * &base.0) % &self.modulus;
                    } else {
                        neg = (&neg * &base.0) % &self.modulus;
                        neg_used = true;
                    }
                }
            }
        }
        if neg_used {
            self.div(&GroupElement(pos), &GroupElement(neg))
        } else {
            GroupElement(pos)
        }
    }

    pub fn sample_scalar<R: Rng + ?Sized>(&self, rng: &mut R) -> Scalar {
        Scalar(rng.gen_biguint_below(&self.order))
    }

    /// Reduces a signed integer into `[0, p - 1]`.
    pub fn reduce(&self, e: &BigInt) -> Scalar {
        let order = BigInt::from_biguint(Sign::Plus, self.order.clone());
        let r = e.mod_floor(&order);
        Scalar(r.to_biguint().expect("mod_floor is non-negative"))
    }

    pub fn scalar(&self, e: i64) -> Scalar {
        self.reduce(&BigInt::from(e))
    }

    /// Wraps an already-reduced value, rejecting anything `>= p`.
    pub fn scalar_from_biguint(&self, value: BigUint) -> Result<Scalar> {
        if value >= self.order {
            return Err(Error::InvalidParams("scalar not reduced mod p".into()));
        }
        Ok(Scalar(value))
    }

    pub fn scalar_add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 + &b.0) % &self.order)
    }

    pub fn scalar_mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 * &b.0) % &self.order)
    }

    /// Inverse mod `p`; `None` for zero.
    pub fn scalar_inv(&self, a: &Scalar) -> Option<Scalar> {
        a.0.modinv(&self.order).map(Scalar)
    }

    /// Recovers `z` in `[-bound, bound]` with `g^z = target`, using a
    /// baby-step table shared by every caller with the same group and bound.
    pub fn dlog(&self, target: &GroupElement, bound: u64) -> Result<i64> {
        dlog_bsgs(self, target, bound)
    }
}

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let limit = 2000usize;
        let mut sieve = vec![true; limit];
        let mut out = Vec::new();
        for i in 2..limit {
            if sieve[i] {
                out.push(i as u32);
                let mut j = i * i;
                while j < limit {
                    sieve[j] = false;
                    j += i;
                }
            }
        }
        out
    })
}

/// Miller-Rabin with random bases, after trial division by small primes.
pub fn is_probable_prime<R: Rng + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &q in small_primes() {
        let q_big = BigUint::from(q);
        if *n == q_big {
            return true;
        }
        if (n % q).is_zero() {
            return false;
        }
    }
    let n_minus_one = n - 1u32;
    let shift = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> shift;
    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n_minus_one);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..shift {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Baby-step giant-step table for exponents in `[-bound, bound]`.
///
/// Baby steps are indexed by the low 64 bits of `g^j`; hits are confirmed
/// by recomputing `g^j`, so a fingerprint collision can never produce a
/// wrong answer.
pub struct BsgsTable {
    bound: u64,
    step: u64,
    baby: HashMap<u64, u32>,
    collisions: HashMap<u64, Vec<u32>>,
    giant: GroupElement,
}

impl BsgsTable {
    pub fn new(params: &GroupParams, bound: u64) -> Result<Self> {
        // Uniqueness of the signed answer needs 2B < p.
        let order_bits = params.order.bits();
        if bound > i64::MAX as u64 / 2 || BigUint::from(bound) * 2u32 >= params.order {
            return Err(Error::BoundTooLarge { bound, order_bits });
        }
        let mut step = ((bound as f64 + 1.0).sqrt() as u64).max(1);
        while step.saturating_mul(step) < bound + 1 {
            step += 1;
        }
        let mut baby = HashMap::with_capacity(step as usize);
        let mut collisions: HashMap<u64, Vec<u32>> = HashMap::new();
        let mut cur = params.identity();
        for j in 0..step {
            let j = u32::try_from(j).map_err(|_| Error::BoundTooLarge { bound, order_bits })?;
            let fp = cur.fingerprint();
            match baby.entry(fp) {
                std::collections::hash_map::Entry::Occupied(_) => collisions.entry(fp).or_default().push(j),
                std::collections::hash_map::Entry::Vacant(v) => {
                    v.insert(j);
                }
            }
            cur = params.mul(&cur, &params.generator);
        }
        // cur == g^step here
        let giant = params.inv(&cur);
        Ok(BsgsTable {
            bound,
            step,
            baby,
            collisions,
            giant,
        })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Number of baby steps stored.
    pub fn len(&self) -> usize {
        self.step as usize
    }

    pub fn is_empty(&self) -> bool {
        self.step == 0
    }

    fn lookup(&self, params: &GroupParams, x: &GroupElement) -> Option<u64> {
        let fp = x.fingerprint();
        let first = self.baby.get(&fp)?;
        let candidates = std::iter::once(first).chain(self.collisions.get(&fp).into_iter().flatten());
        for &j in candidates {
            if params.pow_i64(&params.generator, j as i64) == *x {
                return Some(j as u64);
            }
        }
        None
    }

    /// Searches outward from zero, alternating the positive side (`target`)
    /// and the negative side (`target^-1`).
    pub fn solve(&self, params: &GroupParams, target: &GroupElement) -> Result<i64> {
        let mut pos = target.clone();
        let mut neg = params.inv(target);
        let giant_steps = self.bound / self.step;
        for i in 0..=giant_steps {
            if let Some(j) = self.lookup(params, &pos) {
                let z = i * self.step + j;
                if z <= self.bound {
                    return Ok(z as i64);
                }
            }
            if let Some(j) = self.lookup(params, &neg) {
                let z = i * self.step + j;
                if z <= self.bound {
                    return Ok(-(z as i64));
                }
            }
            pos = params.mul(&pos, &self.giant);
            neg = params.mul(&neg, &self.giant);
        }
        Err(Error::NotInRange { bound: self.bound })
    }
}

type TableKey = (BigUint, BigUint, u64);

fn table_cache() -> &'static Mutex<HashMap<TableKey, Arc<BsgsTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<BsgsTable>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

const TABLE_CACHE_CAPACITY: usize = 24;

/// Shared BSGS table for `(params, bound)`, built on first use.
pub fn bsgs_table(params: &GroupParams, bound: u64) -> Result<Arc<BsgsTable>> {
    let key = (params.modulus.clone(), params.generator.0.clone(), bound);
    if let Some(t) = table_cache().lock().expect("cache lock").get(&key) {
        return Ok(Arc::clone(t));
    }
    // Built outside the lock; a concurrent duplicate build is harmless.
    let table = Arc::new(BsgsTable::new(params, bound)?);
    let mut cache = table_cache().lock().expect("cache lock");
    if cache.len() >= TABLE_CACHE_CAPACITY {
        cache.clear();
    }
    Ok(Arc::clone(cache.entry(key).or_insert(table)))
}

/// The unique `z` in `[-bound, bound]` with `g^z = target`.
pub fn dlog_bsgs(params: &GroupParams, target: &GroupElement, bound: u64) -> Result<i64> {
    if bound == 0 {
        return if target.0.is_one() {
            Ok(0)
        } else {
            Err(Error::NotInRange { bound })
        };
    }
    bsgs_table(params, bound)?.solve(params, target)
}

/// Lowercase big-endian hex for big integers.
pub(crate) mod hex {
    use num_bigint::BigUint;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(16))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = <std::borrow::Cow<'de, str>>::deserialize(d)?;
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(D::Error::custom(format!("invalid hex integer {s:?}")));
        }
        BigUint::parse_bytes(s.as_bytes(), 16).ok_or_else(|| D::Error::custom("invalid hex integer"))
    }
}
