//! Golden encodings: the exact bytes of each wire kind, frozen. Any change
//! to the canonical format shows up here first.

use trustware_core::wire::{decode_message, encode_message, WireKind, WireMessage};
use trustware_core::{
    Advertisement, Decision, DeviceId, Keypair, ManufacturerName, RejectionReason, SessionOffer,
    SessionStatus, SessionToken, TotpCode, TrustVoucher, VerificationRejection,
    VerificationRequest,
};

fn token() -> SessionToken {
    SessionToken::parse("00112233445566778899aabbccddeeff").unwrap()
}

fn device() -> DeviceId {
    DeviceId::parse("0123456789abcdef").unwrap()
}

#[test]
fn session_offer_golden() {
    let msg = WireMessage::SessionOffer(SessionOffer {
        session_token: token(),
        relying_party_url: "http://rp.trustware.test".into(),
        min_trust: 100,
        expires_at: 1_700_000_010,
    });
    let bytes = encode_message(&msg).unwrap();
    assert_eq!(
        String::from_utf8(bytes.clone()).unwrap(),
        "{\"expires_at\":1700000010,\"kind\":\"session_offer\",\"min_trust\":100,\
         \"relying_party_url\":\"http://rp.trustware.test\",\
         \"session_token\":\"00112233445566778899aabbccddeeff\"}"
    );
    assert_eq!(decode_message(&bytes, WireKind::SessionOffer).unwrap(), msg);
}

#[test]
fn advertisement_golden() {
    let msg = WireMessage::Advertisement(Advertisement {
        device_id: device(),
        totp_code: TotpCode::parse("092045").unwrap(),
        manufacturer_url: "http://acme.trustware.test/verify".into(),
    });
    let bytes = encode_message(&msg).unwrap();
    assert_eq!(
        String::from_utf8(bytes.clone()).unwrap(),
        "{\"device_id\":\"0123456789abcdef\",\"kind\":\"advertisement\",\
         \"manufacturer_url\":\"http://acme.trustware.test/verify\",\"totp_code\":\"092045\"}"
    );
    assert_eq!(decode_message(&bytes, WireKind::Advertisement).unwrap(), msg);
}

#[test]
fn verification_request_golden() {
    let msg = WireMessage::VerificationRequest(VerificationRequest {
        device_id: device(),
        totp_code: TotpCode::parse("000007").unwrap(),
        session_token: token(),
    });
    let bytes = encode_message(&msg).unwrap();
    assert_eq!(
        String::from_utf8(bytes.clone()).unwrap(),
        "{\"device_id\":\"0123456789abcdef\",\"kind\":\"verification_request\",\
         \"session_token\":\"00112233445566778899aabbccddeeff\",\"totp_code\":\"000007\"}"
    );
    assert_eq!(decode_message(&bytes, WireKind::VerificationRequest).unwrap(), msg);
}

#[test]
fn verification_rejection_golden() {
    let msg = WireMessage::VerificationRejection(VerificationRejection {
        device_id: device(),
        reason: RejectionReason::RateLimited,
    });
    let bytes = encode_message(&msg).unwrap();
    assert_eq!(
        String::from_utf8(bytes.clone()).unwrap(),
        "{\"device_id\":\"0123456789abcdef\",\"kind\":\"verification_rejection\",\
         \"reason\":\"rate_limited\"}"
    );
    assert_eq!(decode_message(&bytes, WireKind::VerificationRejection).unwrap(), msg);
}

#[test]
fn trust_voucher_golden() {
    // deterministic key, deterministic signature: the whole encoding freezes
    let keypair = Keypair::from_seed(&[1u8; 32]);
    let voucher = TrustVoucher::build_signed(
        &keypair,
        &ManufacturerName::parse("acme").unwrap(),
        &token(),
        &device(),
        50,
        1_699_999_980,
    );
    let signature_hex = voucher.signature.to_hex();
    let msg = WireMessage::TrustVoucher(voucher);
    let bytes = encode_message(&msg).unwrap();
    assert_eq!(
        String::from_utf8(bytes.clone()).unwrap(),
        format!(
            "{{\"device_id\":\"0123456789abcdef\",\"issued_at\":1699999980,\
             \"kind\":\"trust_voucher\",\"manufacturer_name\":\"acme\",\
             \"session_token\":\"00112233445566778899aabbccddeeff\",\
             \"signature\":\"{signature_hex}\",\"trust\":50}}"
        )
    );
    // Ed25519 is deterministic: same key, same payload, same signature
    assert_eq!(
        signature_hex,
        "a8584f6d1c990d197634979797cfff890ed54dbce8b0373e30b25d1bc12540f4\
         af2be721999e1564249bf1b6f10a6b607fe8a04c0b89a90faf8eb47a3796b803"
    );
    assert_eq!(decode_message(&bytes, WireKind::TrustVoucher).unwrap(), msg);
}

#[test]
fn decision_golden() {
    let msg = WireMessage::Decision(Decision {
        session_token: token(),
        status: SessionStatus::Granted,
        total_trust: 150,
    });
    let bytes = encode_message(&msg).unwrap();
    assert_eq!(
        String::from_utf8(bytes.clone()).unwrap(),
        "{\"kind\":\"decision\",\"session_token\":\"00112233445566778899aabbccddeeff\",\
         \"status\":\"granted\",\"total_trust\":150}"
    );
    assert_eq!(decode_message(&bytes, WireKind::Decision).unwrap(), msg);
}
