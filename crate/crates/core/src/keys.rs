use std::fmt;

use ed25519_dalek::{Signer, SigningKey, VerifyingKey};
use rand::RngCore;

use crate::encoding::{from_hex, to_hex};
use crate::error::{Error, Result};
use crate::ids::ManufacturerName;

/// Ed25519 signing key held by a manufacturer's authentication server. The
/// private half never appears in any wire message.
#[derive(Clone)]
pub struct Keypair {
    inner: SigningKey,
}

impl Keypair {
    pub fn generate(rng: &mut (impl RngCore + ?Sized)) -> Self {
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        Self::from_seed(&seed)
    }

    pub fn from_seed(seed: &[u8; 32]) -> Self {
        Self { inner: SigningKey::from_bytes(seed) }
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = from_hex(s)
            .ok_or_else(|| Error::InvalidKey("signing key is not lowercase hex".into()))?;
        let seed: [u8; 32] = bytes
            .try_into()
            .map_err(|_| Error::InvalidKey("signing key must be 32 bytes".into()))?;
        Ok(Self::from_seed(&seed))
    }

    pub fn to_hex(&self) -> String {
        to_hex(&self.inner.to_bytes())
    }

    pub fn public(&self) -> PublicKey {
        PublicKey(self.inner.verifying_key())
    }

    /// Deterministic Ed25519 signature over `payload`.
    pub fn sign(&self, payload: &[u8]) -> Signature {
        Signature(self.inner.sign(payload).to_bytes())
    }
}

impl fmt::Debug for Keypair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Keypair(public={})", self.public().to_hex())
    }
}

/// 32-byte Ed25519 verification key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PublicKey(VerifyingKey);

impl PublicKey {
    pub fn from_bytes(bytes: &[u8; 32]) -> Result<Self> {
        VerifyingKey::from_bytes(bytes)
            .map(Self)
            .map_err(|e| Error::InvalidKey(format!("bad verification key: {e}")))
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = from_hex(s)
            .ok_or_else(|| Error::InvalidKey("public key is not lowercase hex".into()))?;
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| Error::InvalidKey("public key must be 32 bytes".into()))?;
        Self::from_bytes(&arr)
    }

    pub fn to_hex(&self) -> String {
        to_hex(self.0.as_bytes())
    }

    /// True iff `signature` is a valid signature over `payload` under this
    /// key. Strict verification: malleable encodings are rejected.
    pub fn verify(&self, payload: &[u8], signature: &Signature) -> bool {
        let sig = ed25519_dalek::Signature::from_bytes(&signature.0);
        self.0.verify_strict(payload, &sig).is_ok()
    }
}

/// Detached 64-byte signature, carried in vouchers as 128 hex characters.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Signature(pub [u8; 64]);

impl Signature {
    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = from_hex(s)
            .ok_or_else(|| Error::SchemaViolation("signature is not lowercase hex".into()))?;
        let arr: [u8; 64] = bytes
            .try_into()
            .map_err(|_| Error::SchemaViolation("signature must be 64 bytes".into()))?;
        Ok(Self(arr))
    }

    pub fn to_hex(&self) -> String {
        to_hex(&self.0)
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({})", self.to_hex())
    }
}

/// Public identity of a Trustware-verified manufacturer as a relying party
/// sees it: name, verification endpoint, verification key.
#[derive(Debug, Clone)]
pub struct ManufacturerIdentity {
    pub name: ManufacturerName,
    pub url: String,
    pub public_key: PublicKey,
}

impl ManufacturerIdentity {
    pub fn new(name: ManufacturerName, url: impl Into<String>, public_key: PublicKey) -> Result<Self> {
        let url = url.into();
        if url.is_empty() {
            return Err(Error::SchemaViolation("manufacturer url must be non-empty".into()));
        }
        Ok(Self { name, url, public_key })
    }
}
