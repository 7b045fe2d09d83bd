use std::fmt;

use crate::error::{Error, Result};
use crate::ids::{DeviceId, ManufacturerName, SessionToken, TotpCode};
use crate::keys::{Keypair, PublicKey, Signature};

/// The broadcast tuple a device emits: who it is, a fresh one-time code, and
/// where to verify it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Advertisement {
    pub device_id: DeviceId,
    pub totp_code: TotpCode,
    pub manufacturer_url: String,
}

/// What a client forwards to the manufacturer: the overheard advertisement
/// re-bound to the client's session token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationRequest {
    pub device_id: DeviceId,
    pub totp_code: TotpCode,
    pub session_token: SessionToken,
}

/// Manufacturer-signed statement that a device vouches for a session.
///
/// The signature covers [`signing_payload`]; `manufacturer_name` tells the
/// relying party which registry key to verify against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrustVoucher {
    pub session_token: SessionToken,
    pub device_id: DeviceId,
    /// Trust points in 0..=100.
    pub trust: u8,
    pub issued_at: u64,
    pub manufacturer_name: ManufacturerName,
    pub signature: Signature,
}

impl TrustVoucher {
    /// Build and sign a voucher in one step.
    pub fn build_signed(
        keypair: &Keypair,
        manufacturer_name: &ManufacturerName,
        session_token: &SessionToken,
        device_id: &DeviceId,
        trust: u8,
        issued_at: u64,
    ) -> Self {
        debug_assert!(trust <= 100);
        let payload =
            signing_payload(session_token, device_id, trust, issued_at, manufacturer_name);
        Self {
            session_token: session_token.clone(),
            device_id: device_id.clone(),
            trust,
            issued_at,
            manufacturer_name: manufacturer_name.clone(),
            signature: keypair.sign(&payload),
        }
    }

    pub fn signing_payload(&self) -> Vec<u8> {
        signing_payload(
            &self.session_token,
            &self.device_id,
            self.trust,
            self.issued_at,
            &self.manufacturer_name,
        )
    }

    /// Verify the embedded signature against a manufacturer key.
    pub fn verify_signature(&self, key: &PublicKey) -> bool {
        key.verify(&self.signing_payload(), &self.signature)
    }
}

/// Byte-exact payload covered by a voucher signature:
/// `session_token|device_id|trust|issued_at|manufacturer_name`, pipe-joined
/// UTF-8 with integers in plain decimal. No field may contain `|` (token and
/// id are hex, trust and time are digits, the name alphabet excludes it), so
/// the payload is injective over valid field tuples.
pub fn signing_payload(
    session_token: &SessionToken,
    device_id: &DeviceId,
    trust: u8,
    issued_at: u64,
    manufacturer_name: &ManufacturerName,
) -> Vec<u8> {
    format!(
        "{}|{}|{}|{}|{}",
        session_token.as_str(),
        device_id.as_str(),
        trust,
        issued_at,
        manufacturer_name.as_str()
    )
    .into_bytes()
}

/// Relying-party policy for one verification session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrustPolicy {
    /// Trust points required to grant.
    pub threshold: u64,
    /// Seconds a session stays open before an undecided client is denied.
    pub session_timeout_s: u64,
    /// Maximum voucher age (now - issued_at) accepted, in seconds.
    pub voucher_freshness_s: u64,
    /// TOTP intervals of clock skew tolerated around the current one.
    pub skew_intervals: u32,
}

impl Default for TrustPolicy {
    fn default() -> Self {
        Self {
            threshold: 100,
            session_timeout_s: 30,
            voucher_freshness_s: 60,
            skew_intervals: 1,
        }
    }
}

impl TrustPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.threshold == 0
            || self.session_timeout_s == 0
            || self.voucher_freshness_s == 0
            || self.skew_intervals == 0
        {
            return Err(Error::SchemaViolation(
                "trust policy values must all be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// What a relying party hands a client that must prove legitimacy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionOffer {
    pub session_token: SessionToken,
    pub relying_party_url: String,
    pub min_trust: u64,
    pub expires_at: u64,
}

/// Session lifecycle. Transitions only Pending -> Granted or Pending -> Denied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionStatus {
    Pending,
    Granted,
    Denied,
}

impl SessionStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Pending => "pending",
            Self::Granted => "granted",
            Self::Denied => "denied",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pending" => Ok(Self::Pending),
            "granted" => Ok(Self::Granted),
            "denied" => Ok(Self::Denied),
            other => Err(Error::SchemaViolation(format!("unknown session status {other:?}"))),
        }
    }
}

impl fmt::Display for SessionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The relying party's verdict for a session at some instant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub session_token: SessionToken,
    pub status: SessionStatus,
    pub total_trust: u64,
}

/// Machine-readable refusal, from either the manufacturer (verification) or
/// the relying party (voucher ingestion).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationRejection {
    pub device_id: DeviceId,
    pub reason: RejectionReason,
}

/// Every reason a request or voucher can be refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RejectionReason {
    // manufacturer side
    MalformedRequest,
    UnknownDevice,
    BadTotp,
    RateLimited,
    ReplayedCode,
    // relying-party side
    UnknownSession,
    SessionClosed,
    UnknownManufacturer,
    BadSignature,
    TokenMismatch,
    StaleVoucher,
    DuplicateDevice,
}

impl RejectionReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::MalformedRequest => "malformed_request",
            Self::UnknownDevice => "unknown_device",
            Self::BadTotp => "bad_totp",
            Self::RateLimited => "rate_limited",
            Self::ReplayedCode => "replayed_code",
            Self::UnknownSession => "unknown_session",
            Self::SessionClosed => "session_closed",
            Self::UnknownManufacturer => "unknown_manufacturer",
            Self::BadSignature => "bad_signature",
            Self::TokenMismatch => "token_mismatch",
            Self::StaleVoucher => "stale_voucher",
            Self::DuplicateDevice => "duplicate_device",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let reason = match s {
            "malformed_request" => Self::MalformedRequest,
            "unknown_device" => Self::UnknownDevice,
            "bad_totp" => Self::BadTotp,
            "rate_limited" => Self::RateLimited,
            "replayed_code" => Self::ReplayedCode,
            "unknown_session" => Self::UnknownSession,
            "session_closed" => Self::SessionClosed,
            "unknown_manufacturer" => Self::UnknownManufacturer,
            "bad_signature" => Self::BadSignature,
            "token_mismatch" => Self::TokenMismatch,
            "stale_voucher" => Self::StaleVoucher,
            "duplicate_device" => Self::DuplicateDevice,
            other => {
                return Err(Error::SchemaViolation(format!("unknown rejection reason {other:?}")))
            }
        };
        Ok(reason)
    }
}

impl fmt::Display for RejectionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Voucher delivery topology: relayed through the client, or posted to the
/// relying party by the manufacturer itself. Validation is identical either
/// way; this is a deployment flag, not a protocol change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeliveryMode {
    Relayed,
    Direct,
}

impl DeliveryMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Relayed => "relayed",
            Self::Direct => "direct",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "relayed" => Ok(Self::Relayed),
            "direct" => Ok(Self::Direct),
            other => Err(Error::SchemaViolation(format!("unknown delivery mode {other:?}"))),
        }
    }
}

impl fmt::Display for DeliveryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn token_of(c: char) -> SessionToken {
        SessionToken::parse(&c.to_string().repeat(32)).unwrap()
    }

    fn device_of(c: char) -> DeviceId {
        DeviceId::parse(&c.to_string().repeat(16)).unwrap()
    }

    #[test]
    fn signing_payload_exact_bytes() {
        let payload = signing_payload(
            &token_of('a'),
            &device_of('b'),
            50,
            1000,
            &ManufacturerName::parse("acme").unwrap(),
        );
        let expected = format!("{}|{}|50|1000|acme", "a".repeat(32), "b".repeat(16));
        assert_eq!(payload, expected.into_bytes());
    }

    #[test]
    fn signing_payload_zero_trust_single_digit() {
        let payload = signing_payload(
            &token_of('a'),
            &device_of('b'),
            0,
            1,
            &ManufacturerName::parse("m").unwrap(),
        );
        let s = String::from_utf8(payload).unwrap();
        assert!(s.contains("|0|1|"));
    }

    #[test]
    fn signing_payload_differs_only_in_changed_field() {
        let name = ManufacturerName::parse("acme").unwrap();
        let a = signing_payload(&token_of('a'), &device_of('b'), 50, 1000, &name);
        let b = signing_payload(&token_of('a'), &device_of('b'), 51, 1000, &name);
        let a = String::from_utf8(a).unwrap();
        let b = String::from_utf8(b).unwrap();
        assert_eq!(a.replace("|50|", "|51|"), b);
    }

    #[test]
    fn voucher_sign_and_verify() {
        let kp = Keypair::from_seed(&[5u8; 32]);
        let name = ManufacturerName::parse("acme").unwrap();
        let v = TrustVoucher::build_signed(&kp, &name, &token_of('c'), &device_of('d'), 100, 42);
        assert!(v.verify_signature(&kp.public()));

        let other = Keypair::from_seed(&[6u8; 32]);
        assert!(!v.verify_signature(&other.public()));

        let mut tampered = v.clone();
        tampered.trust = 99;
        assert!(!tampered.verify_signature(&kp.public()));
    }

    #[test]
    fn policy_defaults_and_validation() {
        let p = TrustPolicy::default();
        assert_eq!((p.threshold, p.session_timeout_s, p.voucher_freshness_s, p.skew_intervals), (100, 30, 60, 1));
        assert!(p.validate().is_ok());
        assert!(TrustPolicy { threshold: 0, ..p }.validate().is_err());
    }
}
