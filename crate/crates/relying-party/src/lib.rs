//! The relying party: the protected web service that decides whether a
//! client is legitimate.
//!
//! It opens a [`Session`] per verification attempt, validates every incoming
//! trust voucher against its registry of manufacturer keys — signature,
//! token binding, freshness, per-device dedup — and accumulates accepted
//! trust until the policy threshold grants the session or its timeout denies
//! it. Decisions are final.
//!
//! [`http`] exposes the wire surface: `POST /session`, `POST /voucher`,
//! `GET /decision`.

pub mod http;
mod registry;
mod state;

pub use registry::ManufacturerRegistry;
pub use state::{RelyingParty, RpError, Session, VoucherAccepted};
