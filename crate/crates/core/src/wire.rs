//! Canonical wire encoding for the six protocol message kinds.
//!
//! Messages travel as UTF-8 maps with lexicographically sorted keys and no
//! insignificant whitespace, discriminated by a `kind` field. Encoding is a
//! function of the value alone, so semantically equal messages are always
//! byte-identical — which keeps signatures, dedup, and golden-file tests
//! honest. Every encoded message must stay under 1024 bytes, the protocol's
//! one-packet budget.

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::ids::{DeviceId, ManufacturerName, SessionToken, TotpCode};
use crate::keys::Signature;
use crate::messages::{
    Advertisement, Decision, RejectionReason, SessionOffer, SessionStatus, TrustVoucher,
    VerificationRejection, VerificationRequest,
};

/// Hard ceiling on any encoded protocol message.
pub const MAX_MESSAGE_BYTES: usize = 1024;

/// Discriminant for the six wire kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WireKind {
    SessionOffer,
    Advertisement,
    VerificationRequest,
    VerificationRejection,
    TrustVoucher,
    Decision,
}

impl WireKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::SessionOffer => "session_offer",
            Self::Advertisement => "advertisement",
            Self::VerificationRequest => "verification_request",
            Self::VerificationRejection => "verification_rejection",
            Self::TrustVoucher => "trust_voucher",
            Self::Decision => "decision",
        }
    }

    pub fn all() -> [WireKind; 6] {
        [
            Self::SessionOffer,
            Self::Advertisement,
            Self::VerificationRequest,
            Self::VerificationRejection,
            Self::TrustVoucher,
            Self::Decision,
        ]
    }
}

/// A protocol message of any wire kind.
#[derive(Debug, Clone, PartialEq)]
pub enum WireMessage {
    SessionOffer(SessionOffer),
    Advertisement(Advertisement),
    VerificationRequest(VerificationRequest),
    VerificationRejection(VerificationRejection),
    TrustVoucher(TrustVoucher),
    Decision(Decision),
}

impl WireMessage {
    pub fn kind(&self) -> WireKind {
        match self {
            Self::SessionOffer(_) => WireKind::SessionOffer,
            Self::Advertisement(_) => WireKind::Advertisement,
            Self::VerificationRequest(_) => WireKind::VerificationRequest,
            Self::VerificationRejection(_) => WireKind::VerificationRejection,
            Self::TrustVoucher(_) => WireKind::TrustVoucher,
            Self::Decision(_) => WireKind::Decision,
        }
    }
}

/// Encode a message canonically. Fails with [`Error::EncodingOverflow`] if
/// the result would reach the 1 KB budget.
pub fn encode_message(message: &WireMessage) -> Result<Vec<u8>> {
    let mut map = Map::new();
    map.insert("kind".into(), Value::from(message.kind().as_str()));
    match message {
        WireMessage::SessionOffer(m) => {
            map.insert("session_token".into(), Value::from(m.session_token.as_str()));
            map.insert("relying_party_url".into(), Value::from(m.relying_party_url.as_str()));
            map.insert("min_trust".into(), Value::from(m.min_trust));
            map.insert("expires_at".into(), Value::from(m.expires_at));
        }
        WireMessage::Advertisement(m) => {
            map.insert("device_id".into(), Value::from(m.device_id.as_str()));
            map.insert("totp_code".into(), Value::from(m.totp_code.as_str()));
            map.insert("manufacturer_url".into(), Value::from(m.manufacturer_url.as_str()));
        }
        WireMessage::VerificationRequest(m) => {
            map.insert("device_id".into(), Value::from(m.device_id.as_str()));
            map.insert("totp_code".into(), Value::from(m.totp_code.as_str()));
            map.insert("session_token".into(), Value::from(m.session_token.as_str()));
        }
        WireMessage::VerificationRejection(m) => {
            map.insert("device_id".into(), Value::from(m.device_id.as_str()));
            map.insert("reason".into(), Value::from(m.reason.as_str()));
        }
        WireMessage::TrustVoucher(m) => {
            map.insert("session_token".into(), Value::from(m.session_token.as_str()));
            map.insert("device_id".into(), Value::from(m.device_id.as_str()));
            map.insert("trust".into(), Value::from(u64::from(m.trust)));
            map.insert("issued_at".into(), Value::from(m.issued_at));
            map.insert("manufacturer_name".into(), Value::from(m.manufacturer_name.as_str()));
            map.insert("signature".into(), Value::from(m.signature.to_hex()));
        }
        WireMessage::Decision(m) => {
            map.insert("session_token".into(), Value::from(m.session_token.as_str()));
            map.insert("status".into(), Value::from(m.status.as_str()));
            map.insert("total_trust".into(), Value::from(m.total_trust));
        }
    }
    // serde_json's default map is BTreeMap-backed: keys serialize sorted,
    // compact, no whitespace.
    let bytes = serde_json::to_vec(&Value::Object(map)).expect("map serialization is infallible");
    if bytes.len() >= MAX_MESSAGE_BYTES {
        return Err(Error::EncodingOverflow(bytes.len()));
    }
    Ok(bytes)
}

/// Decode and validate a message of a specific expected kind. Never yields a
/// value violating its type invariants.
pub fn decode_message(bytes: &[u8], expected: WireKind) -> Result<WireMessage> {
    let value: Value = serde_json::from_slice(bytes)
        .map_err(|e| Error::MalformedMessage(e.to_string()))?;
    let Value::Object(map) = value else {
        return Err(Error::SchemaViolation("top level must be a map".into()));
    };
    let kind = require_str(&map, "kind")?;
    if kind != expected.as_str() {
        return Err(Error::SchemaViolation(format!(
            "expected kind {:?}, got {kind:?}",
            expected.as_str()
        )));
    }

    let message = match expected {
        WireKind::SessionOffer => {
            check_fields(&map, &["expires_at", "kind", "min_trust", "relying_party_url", "session_token"])?;
            WireMessage::SessionOffer(SessionOffer {
                session_token: SessionToken::parse(require_str(&map, "session_token")?)?,
                relying_party_url: require_url(&map, "relying_party_url")?,
                min_trust: require_u64(&map, "min_trust")?,
                expires_at: require_u64(&map, "expires_at")?,
            })
        }
        WireKind::Advertisement => {
            check_fields(&map, &["device_id", "kind", "manufacturer_url", "totp_code"])?;
            WireMessage::Advertisement(Advertisement {
                device_id: DeviceId::parse(require_str(&map, "device_id")?)?,
                totp_code: TotpCode::parse(require_str(&map, "totp_code")?)?,
                manufacturer_url: require_url(&map, "manufacturer_url")?,
            })
        }
        WireKind::VerificationRequest => {
            check_fields(&map, &["device_id", "kind", "session_token", "totp_code"])?;
            WireMessage::VerificationRequest(VerificationRequest {
                device_id: DeviceId::parse(require_str(&map, "device_id")?)?,
                totp_code: TotpCode::parse(require_str(&map, "totp_code")?)?,
                session_token: SessionToken::parse(require_str(&map, "session_token")?)?,
            })
        }
        WireKind::VerificationRejection => {
            check_fields(&map, &["device_id", "kind", "reason"])?;
            WireMessage::VerificationRejection(VerificationRejection {
                device_id: DeviceId::parse(require_str(&map, "device_id")?)?,
                reason: RejectionReason::parse(require_str(&map, "reason")?)?,
            })
        }
        WireKind::TrustVoucher => {
            check_fields(&map, &["device_id", "issued_at", "kind", "manufacturer_name", "session_token", "signature", "trust"])?;
            let trust = require_u64(&map, "trust")?;
            if trust > 100 {
                return Err(Error::SchemaViolation(format!("trust {trust} outside 0..=100")));
            }
            WireMessage::TrustVoucher(TrustVoucher {
                session_token: SessionToken::parse(require_str(&map, "session_token")?)?,
                device_id: DeviceId::parse(require_str(&map, "device_id")?)?,
                trust: trust as u8,
                issued_at: require_u64(&map, "issued_at")?,
                manufacturer_name: ManufacturerName::parse(require_str(&map, "manufacturer_name")?)?,
                signature: Signature::from_hex(require_str(&map, "signature")?)?,
            })
        }
        WireKind::Decision => {
            check_fields(&map, &["kind", "session_token", "status", "total_trust"])?;
            WireMessage::Decision(Decision {
                session_token: SessionToken::parse(require_str(&map, "session_token")?)?,
                status: SessionStatus::parse(require_str(&map, "status")?)?,
                total_trust: require_u64(&map, "total_trust")?,
            })
        }
    };
    Ok(message)
}

fn check_fields(map: &Map<String, Value>, expected: &[&str]) -> Result<()> {
    for key in map.keys() {
        if !expected.contains(&key.as_str()) {
            return Err(Error::SchemaViolation(format!("unexpected field {key:?}")));
        }
    }
    for key in expected {
        if !map.contains_key(*key) {
            return Err(Error::SchemaViolation(format!("missing field {key:?}")));
        }
    }
    Ok(())
}

fn require_str<'a>(map: &'a Map<String, Value>, key: &str) -> Result<&'a str> {
    map.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| Error::SchemaViolation(format!("field {key:?} missing or not a string")))
}

fn require_u64(map: &Map<String, Value>, key: &str) -> Result<u64> {
    map.get(key)
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::SchemaViolation(format!("field {key:?} missing or not an unsigned integer")))
}

fn require_url(map: &Map<String, Value>, key: &str) -> Result<String> {
    let s = require_str(map, key)?;
    if s.is_empty() {
        return Err(Error::SchemaViolation(format!("field {key:?} must be non-empty")));
    }
    Ok(s.to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keys::Keypair;

    fn sample_voucher() -> TrustVoucher {
        let kp = Keypair::from_seed(&[11u8; 32]);
        TrustVoucher::build_signed(
            &kp,
            &ManufacturerName::parse("acme").unwrap(),
            &SessionToken::parse(&"a".repeat(32)).unwrap(),
            &DeviceId::parse(&"b".repeat(16)).unwrap(),
            100,
            1_699_999_980,
        )
    }

    #[test]
    fn voucher_round_trip() {
        let v = sample_voucher();
        let bytes = encode_message(&WireMessage::TrustVoucher(v.clone())).unwrap();
        let decoded = decode_message(&bytes, WireKind::TrustVoucher).unwrap();
        assert_eq!(decoded, WireMessage::TrustVoucher(v));
    }

    #[test]
    fn equal_values_encode_identically() {
        let a = encode_message(&WireMessage::TrustVoucher(sample_voucher())).unwrap();
        let b = encode_message(&WireMessage::TrustVoucher(sample_voucher())).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trust_out_of_range_is_schema_violation() {
        let bytes = encode_message(&WireMessage::TrustVoucher(sample_voucher())).unwrap();
        let hacked = String::from_utf8(bytes).unwrap().replace("\"trust\":100", "\"trust\":101");
        match decode_message(hacked.as_bytes(), WireKind::TrustVoucher) {
            Err(Error::SchemaViolation(_)) => {}
            other => panic!("expected SchemaViolation, got {other:?}"),
        }
    }

    #[test]
    fn truncated_input_is_malformed() {
        let bytes = encode_message(&WireMessage::TrustVoucher(sample_voucher())).unwrap();
        match decode_message(&bytes[..bytes.len() - 3], WireKind::TrustVoucher) {
            Err(Error::MalformedMessage(_)) => {}
            other => panic!("expected MalformedMessage, got {other:?}"),
        }
    }

    #[test]
    fn extra_and_missing_fields_rejected() {
        let bytes = encode_message(&WireMessage::TrustVoucher(sample_voucher())).unwrap();
        let s = String::from_utf8(bytes).unwrap();
        let extra = s.replacen('{', "{\"bogus\":1,", 1);
        assert!(matches!(
            decode_message(extra.as_bytes(), WireKind::TrustVoucher),
            Err(Error::SchemaViolation(_))
        ));
        let missing = s.replace("\"trust\":100", "\"trust2\":100");
        assert!(matches!(
            decode_message(missing.as_bytes(), WireKind::TrustVoucher),
            Err(Error::SchemaViolation(_))
        ));
    }

    #[test]
    fn kind_mismatch_rejected() {
        let bytes = encode_message(&WireMessage::TrustVoucher(sample_voucher())).unwrap();
        assert!(matches!(
            decode_message(&bytes, WireKind::Decision),
            Err(Error::SchemaViolation(_))
        ));
    }

    #[test]
    fn worst_case_voucher_stays_under_budget() {
        let kp = Keypair::from_seed(&[13u8; 32]);
        let name = ManufacturerName::parse(&"x".repeat(32)).unwrap();
        let v = TrustVoucher::build_signed(
            &kp,
            &name,
            &SessionToken::parse(&"f".repeat(32)).unwrap(),
            &DeviceId::parse(&"f".repeat(16)).unwrap(),
            100,
            u64::MAX,
        );
        let bytes = encode_message(&WireMessage::TrustVoucher(v.clone())).unwrap();

        // independent byte count: assemble the canonical form by hand
        let expected = format!(
            "{{\"device_id\":\"{}\",\"issued_at\":{},\"kind\":\"trust_voucher\",\"manufacturer_name\":\"{}\",\"session_token\":\"{}\",\"signature\":\"{}\",\"trust\":100}}",
            "f".repeat(16),
            u64::MAX,
            "x".repeat(32),
            "f".repeat(32),
            v.signature.to_hex(),
        );
        assert_eq!(bytes, expected.as_bytes());
        assert!(bytes.len() < MAX_MESSAGE_BYTES, "worst case voucher is {} bytes", bytes.len());
    }

    #[test]
    fn oversized_message_overflows() {
        let offer = SessionOffer {
            session_token: SessionToken::parse(&"a".repeat(32)).unwrap(),
            relying_party_url: format!("http://{}/", "r".repeat(1100)),
            min_trust: 100,
            expires_at: 0,
        };
        match encode_message(&WireMessage::SessionOffer(offer)) {
            Err(Error::EncodingOverflow(n)) => assert!(n >= MAX_MESSAGE_BYTES),
            other => panic!("expected EncodingOverflow, got {other:?}"),
        }
    }
}
