//! The key authority: owns both master secrets, publishes the public keys and
//! answers function-key requests from the server.
//!
//! Requests and responses are plain serializable messages; master secrets
//! have no `Serialize` impl, so no message type can carry them.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::febo::{self, BasicOp, FeboMpk, FeboMsk};
use crate::feip::{self, FeipMpk, FeipMsk};
use crate::group::{GroupElement, GroupParams, Scalar};
use crate::secure_matrix::{FunctionKeyBatch, SecureFunction};

/// Everything a client or server may see: group, FEIP keys per vector length
/// and the FEBO key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicKeys {
    pub params: GroupParams,
    pub feip: Vec<FeipMpk>,
    pub febo: FeboMpk,
}

impl PublicKeys {
    pub fn feip(&self, eta: usize) -> Result<&FeipMpk> {
        self.feip
            .iter()
            .find(|m| m.eta() == eta)
            .ok_or_else(|| Error::InvalidParams(format!("no FEIP key provisioned for eta = {eta}")))
    }

    pub fn etas(&self) -> Vec<usize> {
        self.feip.iter().map(FeipMpk::eta).collect()
    }

    /// SHA-256 of the serialized keys, hex. Bundles record it so that a
    /// server holding the wrong authority fails before decrypting.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("public keys serialize");
        crate::client::sha256_hex(&bytes)
    }
}

/// A request for function-derived keys. Operands are quantized integers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "function", rename_all = "kebab-case")]
pub enum KeyRequest {
    /// One FEIP key per row.
    DotProduct { eta: usize, rows: Vec<Vec<i64>> },
    /// One FEBO key per operand, each bound to the matching commitment.
    Elementwise {
        op: BasicOp,
        operands: Vec<Vec<i64>>,
        commitments: Vec<Vec<GroupElement>>,
    },
    /// One FEIP key per flattened convolution kernel.
    ConvKernel { eta: usize, kernels: Vec<Vec<i64>> },
}

impl KeyRequest {
    pub fn function(&self) -> SecureFunction {
        match self {
            KeyRequest::DotProduct { .. } | KeyRequest::ConvKernel { .. } => SecureFunction::DotProduct,
            KeyRequest::Elementwise { op, .. } => SecureFunction::from(*op),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyResponse {
    pub keys: FunctionKeyBatch,
}

/// Anything that can answer key requests: the in-process authority, or a
/// transport in front of it.
pub trait KeyService: Sync {
    fn serve(&self, req: &KeyRequest) -> Result<KeyResponse>;
}

/// Counters kept by the authority. Byte counts follow the wire accounting:
/// 8 bytes per operand, one element per commitment, one scalar per FEIP key
/// and one element per FEBO key.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssuanceLog {
    pub requests: u64,
    pub feip_keys: u64,
    pub febo_keys: u64,
    pub operand_values: u64,
    pub request_bytes: u64,
    pub response_bytes: u64,
    /// Requests per function.
    pub by_function: BTreeMap<SecureFunction, u64>,
}

pub struct AuthorityState {
    public: PublicKeys,
    feip_msk: BTreeMap<usize, FeipMsk>,
    febo_msk: FeboMsk,
    permitted: BTreeSet<SecureFunction>,
    log: Mutex<IssuanceLog>,
}

impl std::fmt::Debug for AuthorityState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AuthorityState")
            .field("etas", &self.public.etas())
            .field("permitted", &self.permitted)
            .finish_non_exhaustive()
    }
}

impl AuthorityState {
    /// Generates one FEIP key pair per requested vector length and one FEBO
    /// key pair, all in `params`.
    pub fn setup<R: Rng + ?Sized>(
        params: &GroupParams,
        etas: &[usize],
        permitted: BTreeSet<SecureFunction>,
        rng: &mut R,
    ) -> Self {
        let etas: BTreeSet<usize> = etas.iter().copied().collect();
        let mut feip_mpk = Vec::new();
        let mut feip_msk = BTreeMap::new();
        for eta in etas {
            let (mpk, msk) = feip::setup(params, eta, rng);
            feip_mpk.push(mpk);
            feip_msk.insert(eta, msk);
        }
        let (febo_mpk, febo_msk) = febo::setup(params, rng);
        AuthorityState {
            public: PublicKeys {
                params: params.clone(),
                feip: feip_mpk,
                febo: febo_mpk,
            },
            feip_msk,
            febo_msk,
            permitted,
            log: Mutex::new(IssuanceLog::default()),
        }
    }

    pub fn public_keys(&self) -> &PublicKeys {
        &self.public
    }

    pub fn permitted(&self) -> &BTreeSet<SecureFunction> {
        &self.permitted
    }

    pub fn issuance(&self) -> IssuanceLog {
        self.log.lock().expect("log lock").clone()
    }

    pub fn reset_issuance(&self) {
        *self.log.lock().expect("log lock") = IssuanceLog::default();
    }

    fn feip_msk(&self, eta: usize) -> Result<&FeipMsk> {
        self.feip_msk
            .get(&eta)
            .ok_or_else(|| Error::MalformedRequest(format!("no FEIP key provisioned for eta = {eta}")))
    }

    fn feip_keys(&self, eta: usize, rows: &[Vec<i64>]) -> Result<FunctionKeyBatch> {
        let msk = self.feip_msk(eta)?;
        if let Some(bad) = rows.iter().find(|r| r.len() != eta) {
            return Err(Error::MalformedRequest(format!(
                "operand row of length {} for eta = {eta}",
                bad.len()
            )));
        }
        let row_keys = rows
            .iter()
            .map(|r| feip::key_derive(msk, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(FunctionKeyBatch::Dot { row_keys })
    }

    fn febo_keys(
        &self,
        op: BasicOp,
        operands: &[Vec<i64>],
        commitments: &[Vec<GroupElement>],
    ) -> Result<FunctionKeyBatch> {
        let congruent =
            operands.len() == commitments.len() && operands.iter().zip(commitments).all(|(a, b)| a.len() == b.len());
        if !congruent {
            return Err(Error::MalformedRequest(
                "element-wise request needs exactly one commitment per operand".into(),
            ));
        }
        let params = &self.public.params;
        let keys = operands
            .iter()
            .zip(commitments)
            .map(|(row, cmts)| {
                row.iter()
                    .zip(cmts)
                    .map(|(&y, cmt)| {
                        if !params.contains(cmt) {
                            return Err(Error::MalformedRequest("commitment outside the group".into()));
                        }
                        febo::key_derive(&self.febo_msk, cmt, op, y)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FunctionKeyBatch::Elementwise { op, keys })
    }

    fn record(&self, req: &KeyRequest, resp: &KeyResponse) {
        let params = &self.public.params;
        let mut log = self.log.lock().expect("log lock");
        log.requests += 1;
        *log.by_function.entry(req.function()).or_default() += 1;
        let (operands, commitments) = match req {
            KeyRequest::DotProduct { rows, .. } => (rows.iter().map(Vec::len).sum::<usize>(), 0),
            KeyRequest::ConvKernel { kernels, .. } => (kernels.iter().map(Vec::len).sum(), 0),
            KeyRequest::Elementwise { operands, .. } => {
                let n = operands.iter().map(Vec::len).sum();
                (n, n)
            }
        };
        log.operand_values += operands as u64;
        log.request_bytes += (operands * 8 + commitments * params.element_bytes()) as u64;
        match &resp.keys {
            FunctionKeyBatch::Dot { row_keys } => {
                log.feip_keys += row_keys.len() as u64;
                log.response_bytes += (row_keys.len() * params.scalar_bytes()) as u64;
            }
            FunctionKeyBatch::Elementwise { keys, .. } => {
                let n: usize = keys.iter().map(Vec::len).sum();
                log.febo_keys += n as u64;
                log.response_bytes += (n * params.element_bytes()) as u64;
            }
        }
    }

    /// Writes the master secrets (and everything needed to rebuild the
    /// public keys) with owner-only permissions.
    pub fn save_secret(&self, path: &Path) -> Result<()> {
        let file = SecretFile {
            version: 1,
            params: self.public.params.clone(),
            feip: self
                .feip_msk
                .iter()
                .map(|(&eta, msk)| SecretFeip {
                    eta,
                    s: msk.secrets().to_vec(),
                })
                .collect(),
            febo_s: self.febo_msk.secret().clone(),
            permitted: self.permitted.clone(),
        };
        let json = serde_json::to_vec_pretty(&file)?;
        write_private(path, &json)
    }

    pub fn load_secret(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let file: SecretFile = serde_json::from_slice(&bytes)?;
        if file.version != 1 {
            return Err(Error::malformed(
                "version",
                format!("unsupported version {}", file.version),
            ));
        }
        file.params.validate()?;
        let params = file.params;
        let mut feip_mpk = Vec::new();
        let mut feip_msk = BTreeMap::new();
        for entry in file.feip {
            if entry.s.len() != entry.eta {
                return Err(Error::malformed("feip", "secret length differs from eta"));
            }
            let s = entry
                .s
                .into_iter()
                .map(|s| params.scalar_from_biguint(s.value().clone()))
                .collect::<Result<Vec<_>>>()?;
            let h = s.iter().map(|si| params.pow_scalar(params.generator(), si)).collect();
            feip_mpk.push(FeipMpk {
                params: params.clone(),
                h,
            });
            feip_msk.insert(entry.eta, FeipMsk::from_parts(params.clone(), s));
        }
        let febo_s = params.scalar_from_biguint(file.febo_s.value().clone())?;
        let febo_mpk = FeboMpk {
            params: params.clone(),
            h: params.pow_scalar(params.generator(), &febo_s),
        };
        Ok(AuthorityState {
            public: PublicKeys {
                params: params.clone(),
                feip: feip_mpk,
                febo: febo_mpk,
            },
            feip_msk,
            febo_msk: FeboMsk::from_parts(params, febo_s),
            permitted: file.permitted,
            log: Mutex::new(IssuanceLog::default()),
        })
    }
}

impl KeyService for AuthorityState {
    fn serve(&self, req: &KeyRequest) -> Result<KeyResponse> {
        let function = req.function();
        if !self.permitted.contains(&function) {
            return Err(Error::UnsupportedFunction(function));
        }
        let keys = match req {
            KeyRequest::DotProduct { eta, rows } => self.feip_keys(*eta, rows)?,
            KeyRequest::ConvKernel { eta, kernels } => self.feip_keys(*eta, kernels)?,
            KeyRequest::Elementwise {
                op,
                operands,
                commitments,
            } => self.febo_keys(*op, operands, commitments)?,
        };
        let resp = KeyResponse { keys };
        self.record(req, &resp);
        Ok(resp)
    }
}

/// Forces every request and response through its JSON encoding, the way a
/// networked deployment would see them.
pub struct JsonTransport<'a, S: KeyService> {
    inner: &'a S,
}

impl<'a, S: KeyService> JsonTransport<'a, S> {
    pub fn new(inner: &'a S) -> Self {
        JsonTransport { inner }
    }
}

impl<S: KeyService> KeyService for JsonTransport<'_, S> {
    fn serve(&self, req: &KeyRequest) -> Result<KeyResponse> {
        let wire = serde_json::to_vec(req)?;
        let received: KeyRequest = serde_json::from_slice(&wire)?;
        let resp = self.inner.serve(&received)?;
        let wire = serde_json::to_vec(&resp)?;
        Ok(serde_json::from_slice(&wire)?)
    }
}

#[derive(Serialize, Deserialize)]
struct SecretFeip {
    eta: usize,
    s: Vec<Scalar>,
}

#[derive(Serialize, Deserialize)]
struct SecretFile {
    version: u32,
    params: GroupParams,
    feip: Vec<SecretFeip>,
    febo_s: Scalar,
    permitted: BTreeSet<SecureFunction>,
}

fn write_private(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut opts = fs::OpenOptions::new();
    opts.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        opts.mode(0o600);
    }
    let mut f = opts.open(path).map_err(|e| Error::io(path, e))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        f.set_permissions(fs::Permissions::from_mode(0o600))
            .map_err(|e| Error::io(path, e))?;
    }
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::tests::test_params;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn authority(permitted: &[SecureFunction]) -> AuthorityState {
        AuthorityState::setup(
            &test_params(64),
            &[3, 4],
            permitted.iter().copied().collect(),
            &mut ChaCha20Rng::seed_from_u64(1),
        )
    }

    #[test]
    fn dot_requests_yield_one_key_per_row() {
        let a = authority(&SecureFunction::ALL);
        let resp = a
            .serve(&KeyRequest::DotProduct {
                eta: 3,
                rows: vec![vec![1, 2, 3], vec![0, 0, 1]],
            })
            .unwrap();
        match resp.keys {
            FunctionKeyBatch::Dot { row_keys } => assert_eq!(row_keys.len(), 2),
            other => panic!("{other:?}"),
        }
        let log = a.issuance();
        assert_eq!(log.feip_keys, 2);
        assert_eq!(log.request_bytes, 6 * 8);
        assert_eq!(log.response_bytes, 2 * a.public_keys().params.scalar_bytes() as u64);
    }

    #[test]
    fn unsupported_and_malformed_requests() {
        let a = authority(&[SecureFunction::DotProduct]);
        let cmt = a.public_keys().params.generator().clone();
        assert!(matches!(
            a.serve(&KeyRequest::Elementwise {
                op: BasicOp::Sub,
                operands: vec![vec![1]],
                commitments: vec![vec![cmt]],
            }),
            Err(Error::UnsupportedFunction(SecureFunction::Sub))
        ));
        assert!(matches!(
            a.serve(&KeyRequest::DotProduct {
                eta: 3,
                rows: vec![vec![1, 2]]
            }),
            Err(Error::MalformedRequest(_))
        ));
        assert!(matches!(
            a.serve(&KeyRequest::DotProduct {
                eta: 9,
                rows: vec![vec![0; 9]]
            }),
            Err(Error::MalformedRequest(_))
        ));
        let a = authority(&SecureFunction::ALL);
        assert!(matches!(
            a.serve(&KeyRequest::Elementwise {
                op: BasicOp::Add,
                operands: vec![vec![1, 2]],
                commitments: vec![vec![a.public_keys().params.generator().clone()]],
            }),
            Err(Error::MalformedRequest(_))
        ));
        assert_eq!(a.issuance().requests, 0);
    }

    #[test]
    fn secret_file_round_trip_rebuilds_public_keys() {
        let a = authority(&SecureFunction::ALL);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("authority.msk.json");
        a.save_secret(&path).unwrap();
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            let mode = fs::metadata(&path).unwrap().permissions().mode();
            assert_eq!(mode & 0o777, 0o600);
        }
        let b = AuthorityState::load_secret(&path).unwrap();
        assert_eq!(a.public_keys(), b.public_keys());
        assert_eq!(a.permitted(), b.permitted());
        let req = KeyRequest::DotProduct {
            eta: 4,
            rows: vec![vec![1, -2, 3, 4]],
        };
        assert_eq!(a.serve(&req).unwrap(), b.serve(&req).unwrap());
    }

    #[test]
    fn public_key_json_never_contains_secrets() {
        let a = authority(&SecureFunction::ALL);
        let json = serde_json::to_string(a.public_keys()).unwrap();
        for msk in a.feip_msk.values() {
            for s in msk.secrets() {
                assert!(!json.contains(&format!("\"{}\"", s.value().to_str_radix(16))));
            }
        }
        assert!(!json.contains(&format!("\"{}\"", a.febo_msk.secret().value().to_str_radix(16))));
    }

    #[test]
    fn json_transport_is_transparent() {
        let a = authority(&SecureFunction::ALL);
        let t = JsonTransport::new(&a);
        let req = KeyRequest::ConvKernel {
            eta: 4,
            kernels: vec![vec![1, 0, -1, 2]],
        };
        assert_eq!(t.serve(&req).unwrap(), a.serve(&req).unwrap());
    }
}
