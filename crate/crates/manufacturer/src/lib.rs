//! The manufacturer authentication server: the component that knows every
//! device it ever produced and turns a valid one-time code into a signed
//! trust voucher.
//!
//! [`AuthServer`] owns the device registry and enforces, per device, the
//! whole verification pipeline: TOTP match within the skew window, the
//! rate limit between successful authentications, single use of each TOTP
//! interval, and the trust heuristic (by default, trust is the inverse of
//! the number of prior uses). Registry changes are journaled append-only and
//! replayed at startup, so a restarted server verifies exactly like the one
//! that went down.
//!
//! [`http`] exposes the wire surface: `POST /verify` and `POST /provision`.

mod heuristic;
pub mod http;
mod journal;
mod server;

pub use heuristic::{HeuristicKind, TrustHeuristic};
pub use journal::{Journal, JournalEvent};
pub use server::{AuthServer, DeviceRecord, ManufacturerError, UsageHistory, VerifyOutcome};
