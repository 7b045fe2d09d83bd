//! Property tests over the canonical wire encoding: round-trip identity,
//! canonicality, the one-packet size budget, and signing-payload injectivity.

use proptest::prelude::*;

use trustware_core::wire::{decode_message, encode_message, WireKind, WireMessage};
use trustware_core::{
    signing_payload, Advertisement, Decision, DeviceId, Keypair, ManufacturerName,
    RejectionReason, SessionOffer, SessionStatus, SessionToken, TotpCode, TrustVoucher,
    VerificationRejection, VerificationRequest,
};

fn hex_string(len: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(proptest::sample::select("0123456789abcdef".as_bytes().to_vec()), len)
        .prop_map(|v| String::from_utf8(v).unwrap())
}

fn device_id() -> impl Strategy<Value = DeviceId> {
    hex_string(16).prop_map(|s| DeviceId::parse(&s).unwrap())
}

fn session_token() -> impl Strategy<Value = SessionToken> {
    hex_string(32).prop_map(|s| SessionToken::parse(&s).unwrap())
}

fn totp_code() -> impl Strategy<Value = TotpCode> {
    (0u32..1_000_000).prop_map(TotpCode::from_value)
}

fn manufacturer_name() -> impl Strategy<Value = ManufacturerName> {
    "[a-z0-9-]{1,32}".prop_map(|s| ManufacturerName::parse(&s).unwrap())
}

fn url() -> impl Strategy<Value = String> {
    "[a-z0-9./:-]{1,60}".prop_map(|s| format!("http://{s}"))
}

fn status() -> impl Strategy<Value = SessionStatus> {
    prop_oneof![
        Just(SessionStatus::Pending),
        Just(SessionStatus::Granted),
        Just(SessionStatus::Denied)
    ]
}

fn reason() -> impl Strategy<Value = RejectionReason> {
    prop_oneof![
        Just(RejectionReason::MalformedRequest),
        Just(RejectionReason::UnknownDevice),
        Just(RejectionReason::BadTotp),
        Just(RejectionReason::RateLimited),
        Just(RejectionReason::ReplayedCode),
        Just(RejectionReason::UnknownSession),
        Just(RejectionReason::SessionClosed),
        Just(RejectionReason::UnknownManufacturer),
        Just(RejectionReason::BadSignature),
        Just(RejectionReason::TokenMismatch),
        Just(RejectionReason::StaleVoucher),
        Just(RejectionReason::DuplicateDevice),
    ]
}

fn voucher() -> impl Strategy<Value = TrustVoucher> {
    (session_token(), device_id(), 0u8..=100, any::<u64>(), manufacturer_name(), any::<[u8; 32]>())
        .prop_map(|(token, device, trust, issued_at, name, seed)| {
            TrustVoucher::build_signed(&Keypair::from_seed(&seed), &name, &token, &device, trust, issued_at)
        })
}

fn message() -> impl Strategy<Value = WireMessage> {
    prop_oneof![
        (session_token(), url(), any::<u64>(), any::<u64>()).prop_map(|(t, u, m, e)| {
            WireMessage::SessionOffer(SessionOffer {
                session_token: t,
                relying_party_url: u,
                min_trust: m,
                expires_at: e,
            })
        }),
        (device_id(), totp_code(), url()).prop_map(|(d, c, u)| {
            WireMessage::Advertisement(Advertisement {
                device_id: d,
                totp_code: c,
                manufacturer_url: u,
            })
        }),
        (device_id(), totp_code(), session_token()).prop_map(|(d, c, t)| {
            WireMessage::VerificationRequest(VerificationRequest {
                device_id: d,
                totp_code: c,
                session_token: t,
            })
        }),
        (device_id(), reason()).prop_map(|(d, r)| {
            WireMessage::VerificationRejection(VerificationRejection { device_id: d, reason: r })
        }),
        voucher().prop_map(WireMessage::TrustVoucher),
        (session_token(), status(), any::<u64>()).prop_map(|(t, s, n)| {
            WireMessage::Decision(Decision { session_token: t, status: s, total_trust: n })
        }),
    ]
}

proptest! {
    #[test]
    fn round_trip_and_canonical(msg in message()) {
        let bytes = encode_message(&msg).unwrap();
        prop_assert!(bytes.len() < 1024);
        let decoded = decode_message(&bytes, msg.kind()).unwrap();
        prop_assert_eq!(&decoded, &msg);
        // re-encoding the decoded value reproduces the exact bytes
        let again = encode_message(&decoded).unwrap();
        prop_assert_eq!(again, bytes);
    }

    #[test]
    fn signing_payload_injective(
        t1 in session_token(), t2 in session_token(),
        d1 in device_id(), d2 in device_id(),
        r1 in 0u8..=100, r2 in 0u8..=100,
        at1 in any::<u64>(), at2 in any::<u64>(),
        n1 in manufacturer_name(), n2 in manufacturer_name(),
    ) {
        let p1 = signing_payload(&t1, &d1, r1, at1, &n1);
        let p2 = signing_payload(&t2, &d2, r2, at2, &n2);
        let same_inputs = t1 == t2 && d1 == d2 && r1 == r2 && at1 == at2 && n1 == n2;
        prop_assert_eq!(p1 == p2, same_inputs);
    }

    #[test]
    fn garbage_never_decodes_to_a_value(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        for kind in WireKind::all() {
            // decoding junk must error, never panic or half-construct
            let _ = decode_message(&bytes, kind);
        }
    }
}
