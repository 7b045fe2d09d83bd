use std::collections::{BTreeMap, BTreeSet};

use rand::RngCore;
use thiserror::Error;

use trustware_core::{
    Decision, DeviceId, RejectionReason, SessionOffer, SessionStatus, SessionToken, TrustPolicy,
    TrustVoucher, VerificationRejection,
};

use crate::registry::ManufacturerRegistry;

#[derive(Debug, Error)]
pub enum RpError {
    #[error("unknown session")]
    UnknownSession,
}

/// One verification attempt: its token, policy snapshot, accumulated trust,
/// and verdict. `total_trust` is always exactly the sum over accepted
/// vouchers, each from a distinct device.
#[derive(Debug, Clone)]
pub struct Session {
    pub token: SessionToken,
    pub created_at: u64,
    pub policy: TrustPolicy,
    pub total_trust: u64,
    pub contributing_devices: BTreeSet<DeviceId>,
    /// Accepted vouchers in acceptance order, for audit.
    pub accepted: Vec<(DeviceId, u8)>,
    pub status: SessionStatus,
    /// Instant the status became final; for timeouts this is the deadline
    /// itself, however late the observation.
    pub decided_at: Option<u64>,
}

impl Session {
    fn new(token: SessionToken, created_at: u64, policy: TrustPolicy) -> Self {
        Self {
            token,
            created_at,
            policy,
            total_trust: 0,
            contributing_devices: BTreeSet::new(),
            accepted: Vec::new(),
            status: SessionStatus::Pending,
            decided_at: None,
        }
    }

    pub fn deadline(&self) -> u64 {
        self.created_at + self.policy.session_timeout_s
    }

    /// Apply the timeout rule: a session still pending at its deadline is
    /// denied, as of the deadline.
    fn settle_timeout(&mut self, now: u64) {
        if self.status == SessionStatus::Pending && now >= self.deadline() {
            self.status = SessionStatus::Denied;
            self.decided_at = Some(self.deadline());
        }
    }
}

/// Outcome of a successful voucher ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoucherAccepted {
    pub total_trust: u64,
    pub status: SessionStatus,
    /// True when this voucher pushed the session over its threshold.
    pub granted_now: bool,
}

/// Relying-party state: the manufacturer key registry and all sessions.
pub struct RelyingParty {
    url: String,
    policy: TrustPolicy,
    registry: ManufacturerRegistry,
    sessions: BTreeMap<SessionToken, Session>,
}

impl RelyingParty {
    pub fn new(url: impl Into<String>, policy: TrustPolicy, registry: ManufacturerRegistry) -> Self {
        Self { url: url.into(), policy, registry, sessions: BTreeMap::new() }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn policy(&self) -> &TrustPolicy {
        &self.policy
    }

    pub fn registry(&self) -> &ManufacturerRegistry {
        &self.registry
    }

    pub fn session(&self, token: &SessionToken) -> Option<&Session> {
        self.sessions.get(token)
    }

    pub fn sessions(&self) -> impl Iterator<Item = &Session> {
        self.sessions.values()
    }

    /// Open a fresh pending session and return the offer a client embeds in
    /// its page: token, required trust, and expiry.
    pub fn open_session(&mut self, rng: &mut (impl RngCore + ?Sized), now: u64) -> SessionOffer {
        let token = loop {
            let candidate = SessionToken::generate(rng);
            if !self.sessions.contains_key(&candidate) {
                break candidate;
            }
        };
        let session = Session::new(token.clone(), now, self.policy.clone());
        let offer = SessionOffer {
            session_token: token.clone(),
            relying_party_url: self.url.clone(),
            min_trust: self.policy.threshold,
            expires_at: session.deadline(),
        };
        self.sessions.insert(token, session);
        offer
    }

    /// Ingest one voucher for the session named by `target` (the relay's
    /// session when delivered through a client, the voucher's own token when
    /// delivered directly). Acceptance adds the voucher's trust exactly once
    /// per device and grants eagerly at the threshold.
    pub fn accept_voucher(
        &mut self,
        target: Option<&SessionToken>,
        voucher: &TrustVoucher,
        now: u64,
    ) -> Result<VoucherAccepted, VerificationRejection> {
        let reject = |reason: RejectionReason| {
            Err(VerificationRejection { device_id: voucher.device_id.clone(), reason })
        };

        let token = target.unwrap_or(&voucher.session_token);
        let Some(session) = self.sessions.get_mut(token) else {
            return reject(RejectionReason::UnknownSession);
        };
        session.settle_timeout(now);
        if session.status != SessionStatus::Pending {
            return reject(RejectionReason::SessionClosed);
        }
        if voucher.session_token != *token {
            return reject(RejectionReason::TokenMismatch);
        }
        let Some(key) = self.registry.get(&voucher.manufacturer_name) else {
            return reject(RejectionReason::UnknownManufacturer);
        };
        if !voucher.verify_signature(key) {
            return reject(RejectionReason::BadSignature);
        }
        if now.saturating_sub(voucher.issued_at) > session.policy.voucher_freshness_s {
            return reject(RejectionReason::StaleVoucher);
        }
        if session.contributing_devices.contains(&voucher.device_id) {
            // also catches byte-identical redelivery
            return reject(RejectionReason::DuplicateDevice);
        }

        session.total_trust += u64::from(voucher.trust);
        session.contributing_devices.insert(voucher.device_id.clone());
        session.accepted.push((voucher.device_id.clone(), voucher.trust));
        let granted_now = session.total_trust >= session.policy.threshold;
        if granted_now {
            session.status = SessionStatus::Granted;
            session.decided_at = Some(now);
        }
        Ok(VoucherAccepted {
            total_trust: session.total_trust,
            status: session.status,
            granted_now,
        })
    }

    /// Current verdict for a session, settling the timeout if it has passed.
    /// Granted and Denied are final.
    pub fn session_decision(
        &mut self,
        token: &SessionToken,
        now: u64,
    ) -> Result<Decision, RpError> {
        let session = self.sessions.get_mut(token).ok_or(RpError::UnknownSession)?;
        session.settle_timeout(now);
        Ok(Decision {
            session_token: token.clone(),
            status: session.status,
            total_trust: session.total_trust,
        })
    }
}
