use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::RngCore;
use thiserror::Error;

use trustware_core::{
    DeviceId, DeviceSecret, Keypair, ManufacturerName, PublicKey, RejectionReason, TrustVoucher,
    VerificationRejection, VerificationRequest,
};
use trustware_otp::{verify_totp, IntervalIndex};

use crate::heuristic::TrustHeuristic;
use crate::journal::{Journal, JournalEvent};

#[derive(Debug, Error)]
pub enum ManufacturerError {
    #[error("storage failure: {0}")]
    Storage(#[from] std::io::Error),
    #[error("journal corrupt: {0}")]
    JournalCorrupt(String),
    #[error("device {0} already registered")]
    DuplicateDevice(String),
}

/// Per-device authentication history.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UsageHistory {
    pub success_count: u64,
    pub last_success_at: Option<u64>,
    /// TOTP intervals already redeemed, kept only within the skew horizon.
    /// The rate limit alone would admit a replay at the edge of a 30-second
    /// window; consuming the interval closes that.
    pub consumed_intervals: BTreeSet<u64>,
}

/// One manufactured device as the registry stores it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceRecord {
    pub device_id: DeviceId,
    pub secret: DeviceSecret,
    pub registered_at: u64,
    pub usage: UsageHistory,
}

/// Result of a verification request: a signed voucher or a machine-readable
/// rejection. Rejections never carry a signature.
#[derive(Debug, Clone, PartialEq)]
pub enum VerifyOutcome {
    Issued(TrustVoucher),
    Rejected(VerificationRejection),
}

impl VerifyOutcome {
    pub fn is_issued(&self) -> bool {
        matches!(self, Self::Issued(_))
    }
}

/// A manufacturer's authentication server state: identity, signing key,
/// heuristic, and the device database.
pub struct AuthServer {
    name: ManufacturerName,
    url: String,
    keypair: Keypair,
    heuristic: TrustHeuristic,
    skew_intervals: u32,
    devices: BTreeMap<DeviceId, DeviceRecord>,
    journal: Option<Journal>,
}

impl AuthServer {
    pub fn new(
        name: ManufacturerName,
        url: impl Into<String>,
        keypair: Keypair,
        heuristic: TrustHeuristic,
        skew_intervals: u32,
    ) -> Self {
        Self {
            name,
            url: url.into(),
            keypair,
            heuristic,
            skew_intervals,
            devices: BTreeMap::new(),
            journal: None,
        }
    }

    /// Open with a journal: replay whatever is on disk, then append every
    /// future mutation to it.
    pub fn with_journal(
        name: ManufacturerName,
        url: impl Into<String>,
        keypair: Keypair,
        heuristic: TrustHeuristic,
        skew_intervals: u32,
        path: impl AsRef<Path>,
    ) -> Result<Self, ManufacturerError> {
        let mut server = Self::new(name, url, keypair, heuristic, skew_intervals);
        for event in Journal::replay(path.as_ref())? {
            server.apply(&event)?;
        }
        server.journal = Some(Journal::open(path)?);
        Ok(server)
    }

    fn apply(&mut self, event: &JournalEvent) -> Result<(), ManufacturerError> {
        match event {
            JournalEvent::Provision { at, device_id, secret } => {
                self.devices.insert(
                    device_id.clone(),
                    DeviceRecord {
                        device_id: device_id.clone(),
                        secret: secret.clone(),
                        registered_at: *at,
                        usage: UsageHistory::default(),
                    },
                );
            }
            JournalEvent::VerifyOk { at, device_id, interval } => {
                let record = self.devices.get_mut(device_id).ok_or_else(|| {
                    ManufacturerError::JournalCorrupt(format!(
                        "verify_ok for unprovisioned device {device_id}"
                    ))
                })?;
                record.usage.success_count += 1;
                record.usage.last_success_at = Some(*at);
                record.usage.consumed_intervals.insert(*interval);
                prune_consumed(&mut record.usage, *interval);
            }
        }
        Ok(())
    }

    fn journal_append(&mut self, event: &JournalEvent) -> Result<(), ManufacturerError> {
        if let Some(journal) = &mut self.journal {
            journal.append(event)?;
        }
        Ok(())
    }

    pub fn name(&self) -> &ManufacturerName {
        &self.name
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn public_key(&self) -> PublicKey {
        self.keypair.public()
    }

    pub fn heuristic(&self) -> &TrustHeuristic {
        &self.heuristic
    }

    pub fn device_count(&self) -> usize {
        self.devices.len()
    }

    /// Read-only registry lookup; never mutates usage.
    pub fn registry_lookup(&self, device_id: &DeviceId) -> Option<&DeviceRecord> {
        self.devices.get(device_id)
    }

    /// Register a freshly manufactured device: unique id, fresh secret,
    /// empty history. Journaled before it becomes visible.
    pub fn provision_device(
        &mut self,
        rng: &mut dyn RngCore,
        now: u64,
    ) -> Result<DeviceRecord, ManufacturerError> {
        let device_id = loop {
            let candidate = DeviceId::generate(rng);
            if !self.devices.contains_key(&candidate) {
                break candidate;
            }
        };
        let secret = DeviceSecret::generate(rng);
        let event = JournalEvent::Provision {
            at: now,
            device_id: device_id.clone(),
            secret: secret.clone(),
        };
        self.journal_append(&event)?;
        self.apply(&event)?;
        Ok(self.devices[&device_id].clone())
    }

    /// Import a device with a known identity (roster files, migrations).
    /// Same journal semantics as provisioning.
    pub fn register_device(
        &mut self,
        device_id: DeviceId,
        secret: DeviceSecret,
        now: u64,
    ) -> Result<DeviceRecord, ManufacturerError> {
        if self.devices.contains_key(&device_id) {
            return Err(ManufacturerError::DuplicateDevice(device_id.to_string()));
        }
        let event = JournalEvent::Provision { at: now, device_id: device_id.clone(), secret };
        self.journal_append(&event)?;
        self.apply(&event)?;
        Ok(self.devices[&device_id].clone())
    }

    /// Trust for a device's current history under this server's heuristic.
    pub fn compute_trust(&self, usage: &UsageHistory) -> u8 {
        self.heuristic.compute_trust(usage)
    }

    /// The verification pipeline of the protocol: device lookup, TOTP match
    /// within the skew window, rate limit, single-use interval check, then
    /// voucher issuance. The decision and the usage update happen atomically
    /// per device; no rejection path mutates anything.
    pub fn handle_verification(
        &mut self,
        request: &VerificationRequest,
        now: u64,
    ) -> Result<VerifyOutcome, ManufacturerError> {
        let reject = |reason: RejectionReason| {
            Ok(VerifyOutcome::Rejected(VerificationRejection {
                device_id: request.device_id.clone(),
                reason,
            }))
        };

        let Some(record) = self.devices.get(&request.device_id) else {
            return reject(RejectionReason::UnknownDevice);
        };

        let matched: Option<IntervalIndex> =
            match verify_totp(&record.secret, request.totp_code.as_str(), now as i64, self.skew_intervals) {
                Ok(m) => m,
                Err(_) => return reject(RejectionReason::MalformedRequest),
            };
        let Some(interval) = matched else {
            return reject(RejectionReason::BadTotp);
        };

        if let Some(last) = record.usage.last_success_at {
            if now.saturating_sub(last) < self.heuristic.rate_limit_s {
                return reject(RejectionReason::RateLimited);
            }
        }

        if record.usage.consumed_intervals.contains(&interval.value()) {
            return reject(RejectionReason::ReplayedCode);
        }

        // trust reflects uses prior to this one: a device's first voucher is
        // worth full trust
        let trust = self.heuristic.compute_trust(&record.usage);

        let event = JournalEvent::VerifyOk {
            at: now,
            device_id: request.device_id.clone(),
            interval: interval.value(),
        };
        self.journal_append(&event)?;
        self.apply(&event)?;

        let voucher = TrustVoucher::build_signed(
            &self.keypair,
            &self.name,
            &request.session_token,
            &request.device_id,
            trust,
            now,
        );
        Ok(VerifyOutcome::Issued(voucher))
    }
}

/// Drop consumed intervals that can no longer match: anything below the
/// current interval minus two.
fn prune_consumed(usage: &mut UsageHistory, current_interval: u64) {
    let horizon = current_interval.saturating_sub(2);
    usage.consumed_intervals.retain(|iv| *iv >= horizon);
}
