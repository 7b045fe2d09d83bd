//! Shared protocol model for Trustware: a client-legitimacy scheme in which
//! nearby devices vouch for a client by broadcasting one-time passcodes that
//! their manufacturers verify and convert into signed trust vouchers.
//!
//! This crate defines everything the other components agree on:
//!
//! - identity newtypes ([`DeviceId`], [`DeviceSecret`], [`SessionToken`],
//!   [`ManufacturerName`], [`TotpCode`]) with their shape invariants enforced
//!   at construction;
//! - the six wire message kinds and their canonical encoding
//!   ([`wire::encode_message`] / [`wire::decode_message`]): UTF-8 maps with
//!   lexicographically sorted keys and no insignificant whitespace, so equal
//!   values always serialize to identical bytes and every message fits in a
//!   single sub-1 KB network packet;
//! - the byte-exact voucher [`signing_payload`] and Ed25519 [`Keypair`] /
//!   [`PublicKey`] operations that make vouchers verifiable offline;
//! - [`TrustPolicy`], the relying party's knobs (threshold, session timeout,
//!   voucher freshness, accepted clock skew);
//! - a [`Clock`] that services consult instead of wall time, so whole
//!   protocol runs can execute under a controlled virtual clock.
//!
//! All values are immutable after construction and the operations here are
//! pure functions, so everything can be shared freely across tasks.

mod clock;
mod encoding;
mod error;
mod ids;
mod keys;
mod messages;
pub mod wire;

pub use clock::Clock;
pub use error::{Error, Result};
pub use ids::{DeviceId, DeviceSecret, ManufacturerName, SessionToken, TotpCode};
pub use keys::{Keypair, ManufacturerIdentity, PublicKey, Signature};
pub use messages::{
    signing_payload, Advertisement, Decision, DeliveryMode, RejectionReason, SessionOffer,
    SessionStatus, TrustPolicy, TrustVoucher, VerificationRejection, VerificationRequest,
};
