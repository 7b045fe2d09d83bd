use std::fmt;

use rand::RngCore;

use crate::encoding::{base32_decode, base32_encode, to_hex};
use crate::error::{Error, Result};

fn is_lower_hex(s: &str, len: usize) -> bool {
    s.len() == len && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

/// 64-bit device identity, rendered as 16 lowercase hex characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeviceId(String);

impl DeviceId {
    pub fn generate(rng: &mut (impl RngCore + ?Sized)) -> Self {
        let mut bytes = [0u8; 8];
        rng.fill_bytes(&mut bytes);
        Self(to_hex(&bytes))
    }

    pub fn parse(s: &str) -> Result<Self> {
        if is_lower_hex(s, 16) {
            Ok(Self(s.to_owned()))
        } else {
            Err(Error::SchemaViolation(format!(
                "device id must be 16 lowercase hex chars, got {s:?}"
            )))
        }
    }

    /// All-zero placeholder for rejections of requests whose device id could
    /// not be recovered.
    pub fn unknown() -> Self {
        Self("0".repeat(16))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// 128-bit session token identifying one verification attempt at a relying
/// party, rendered as 32 lowercase hex characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SessionToken(String);

impl SessionToken {
    pub fn generate(rng: &mut (impl RngCore + ?Sized)) -> Self {
        let mut bytes = [0u8; 16];
        rng.fill_bytes(&mut bytes);
        Self(to_hex(&bytes))
    }

    pub fn parse(s: &str) -> Result<Self> {
        if is_lower_hex(s, 32) {
            Ok(Self(s.to_owned()))
        } else {
            Err(Error::SchemaViolation(format!(
                "session token must be 32 lowercase hex chars, got {s:?}"
            )))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SessionToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Device TOTP secret: 16 base32 characters (RFC 4648 alphabet, no padding)
/// decoding to a 10-byte HMAC key.
#[derive(Clone, PartialEq, Eq)]
pub struct DeviceSecret(String);

impl DeviceSecret {
    pub const KEY_LEN: usize = 10;

    pub fn generate(rng: &mut (impl RngCore + ?Sized)) -> Self {
        let mut bytes = [0u8; Self::KEY_LEN];
        rng.fill_bytes(&mut bytes);
        Self(base32_encode(&bytes))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let decoded = base32_decode(s).ok_or_else(|| {
            Error::SchemaViolation("device secret is not valid unpadded base32".into())
        })?;
        if s.len() != 16 || decoded.len() != Self::KEY_LEN {
            return Err(Error::SchemaViolation(format!(
                "device secret must be 16 base32 chars ({} key bytes), got {} chars",
                Self::KEY_LEN,
                s.len()
            )));
        }
        Ok(Self(s.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The decoded HMAC key.
    pub fn key_bytes(&self) -> [u8; Self::KEY_LEN] {
        let decoded = base32_decode(&self.0).expect("validated at construction");
        let mut key = [0u8; Self::KEY_LEN];
        key.copy_from_slice(&decoded);
        key
    }
}

// Secrets stay out of debug dumps; traffic scans in the simulator assert they
// never appear on the wire.
impl fmt::Debug for DeviceSecret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("DeviceSecret(..)")
    }
}

/// Manufacturer name as it appears in vouchers and key registries. Restricted
/// to `[a-z0-9-]{1,32}` so the pipe-delimited signing payload stays injective.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ManufacturerName(String);

impl ManufacturerName {
    pub fn parse(s: &str) -> Result<Self> {
        let ok = !s.is_empty()
            && s.len() <= 32
            && s.bytes().all(|b| matches!(b, b'a'..=b'z' | b'0'..=b'9' | b'-'));
        if ok {
            Ok(Self(s.to_owned()))
        } else {
            Err(Error::SchemaViolation(format!(
                "manufacturer name must match [a-z0-9-]{{1,32}}, got {s:?}"
            )))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ManufacturerName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Six-decimal-digit one-time code, leading zeros included.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TotpCode(String);

impl TotpCode {
    pub fn parse(s: &str) -> Result<Self> {
        if s.len() == 6 && s.bytes().all(|b| b.is_ascii_digit()) {
            Ok(Self(s.to_owned()))
        } else {
            Err(Error::SchemaViolation(format!(
                "totp code must be exactly 6 decimal digits, got {s:?}"
            )))
        }
    }

    /// Render a truncated code value (already reduced mod 10^6).
    pub fn from_value(value: u32) -> Self {
        debug_assert!(value < 1_000_000);
        Self(format!("{value:06}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TotpCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn session_token_shape_and_determinism() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let a = SessionToken::generate(&mut rng);
        assert_eq!(a.as_str().len(), 32);
        assert!(a.as_str().bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')));

        // same seed, same token
        let mut rng2 = ChaCha20Rng::seed_from_u64(0);
        assert_eq!(a, SessionToken::generate(&mut rng2));

        // different seed, different token
        let mut rng3 = ChaCha20Rng::seed_from_u64(1);
        assert_ne!(a, SessionToken::generate(&mut rng3));
    }

    #[test]
    fn device_id_shape() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let id = DeviceId::generate(&mut rng);
        assert_eq!(id.as_str().len(), 16);
        assert!(DeviceId::parse(id.as_str()).is_ok());
        assert!(DeviceId::parse("ABCDEF0123456789").is_err()); // uppercase
        assert!(DeviceId::parse("abc").is_err());
    }

    #[test]
    fn secret_round_trips_ten_bytes() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let s = DeviceSecret::generate(&mut rng);
        assert_eq!(s.as_str().len(), 16);
        assert_eq!(s.key_bytes().len(), 10);
        assert_eq!(DeviceSecret::parse(s.as_str()).unwrap(), s);
    }

    #[test]
    fn secret_debug_is_redacted() {
        let s = DeviceSecret::parse("GEZDGNBVGY3TQOJQ").unwrap();
        assert_eq!(format!("{s:?}"), "DeviceSecret(..)");
    }

    #[test]
    fn manufacturer_name_alphabet() {
        assert!(ManufacturerName::parse("acme-02").is_ok());
        assert!(ManufacturerName::parse("").is_err());
        assert!(ManufacturerName::parse("Acme").is_err());
        assert!(ManufacturerName::parse("a|b").is_err());
        assert!(ManufacturerName::parse(&"a".repeat(33)).is_err());
    }

    #[test]
    fn totp_code_keeps_leading_zeros() {
        let c = TotpCode::from_value(7);
        assert_eq!(c.as_str(), "000007");
        assert!(TotpCode::parse("123456").is_ok());
        assert!(TotpCode::parse("12345").is_err());
        assert!(TotpCode::parse("12345a").is_err());
    }
}
