use std::collections::{BTreeMap, BTreeSet};

use trustware_core::{
    Advertisement, DeliveryMode, DeviceId, SessionToken, TrustVoucher, VerificationRequest,
};

/// The three attacks the protocol's reputation model invites. All of them
/// work purely from overheard advertisements; none requires a device secret.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryKind {
    /// Resubmits overheard (id, code) pairs later under its own token.
    Replayer,
    /// Redeems overheard codes for a prespecified token — harvesting trust
    /// for a session far from the devices.
    Miner,
    /// Redeems and discards vouchers purely to burn the devices' trust.
    Eater,
}

impl AdversaryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Replayer => "replayer",
            Self::Miner => "miner",
            Self::Eater => "eater",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "replayer" => Some(Self::Replayer),
            "miner" => Some(Self::Miner),
            "eater" => Some(Self::Eater),
            _ => None,
        }
    }
}

/// Time-scripted adversary behavior, deterministic so attack outcomes are
/// reproducible assertions.
#[derive(Debug, Clone)]
pub struct AdversaryScript {
    pub kind: AdversaryKind,
    /// Absolute window during which broadcasts are harvested; `None` means
    /// always listening.
    pub harvest_window: Option<(u64, u64)>,
    /// Replayer: absolute times at which every harvested pair is resubmitted.
    pub replay_at: Vec<u64>,
    /// Miner: hold redeemed vouchers and deliver them all at this absolute
    /// time. `None` delivers immediately upon redemption.
    pub deliver_at: Option<u64>,
    /// Eater: minimum seconds between verification attempts per device.
    pub request_rate_s: u64,
}

impl AdversaryScript {
    pub fn replayer(replay_at: Vec<u64>) -> Self {
        Self {
            kind: AdversaryKind::Replayer,
            harvest_window: None,
            replay_at,
            deliver_at: None,
            request_rate_s: 0,
        }
    }

    pub fn miner(deliver_at: Option<u64>) -> Self {
        Self {
            kind: AdversaryKind::Miner,
            harvest_window: None,
            replay_at: Vec::new(),
            deliver_at,
            request_rate_s: 0,
        }
    }

    pub fn eater(request_rate_s: u64) -> Self {
        Self {
            kind: AdversaryKind::Eater,
            harvest_window: None,
            replay_at: Vec::new(),
            deliver_at: None,
            request_rate_s,
        }
    }
}

/// What an adversary wants done; the harness executes it.
#[derive(Debug, Clone, PartialEq)]
pub enum AdversaryAction {
    /// Submit a verification request to a manufacturer.
    Verify { manufacturer_url: String, request: VerificationRequest },
    /// Post a voucher to the relying party for `target`'s session.
    Deliver { target: SessionToken, voucher: TrustVoucher },
}

/// A scripted attacker: listens in its scope, redeems or replays what it
/// hears, and (mis)delivers what it wins.
#[derive(Debug)]
pub struct Adversary {
    pub name: String,
    pub scope: String,
    script: AdversaryScript,
    delivery: DeliveryMode,
    own_token: Option<SessionToken>,
    cross_targets: Vec<SessionToken>,
    loot: Vec<Advertisement>,
    redeemed_devices: BTreeSet<DeviceId>,
    last_attempt: BTreeMap<DeviceId, u64>,
    stockpile: Vec<TrustVoucher>,
}

impl Adversary {
    pub fn new(
        name: impl Into<String>,
        scope: impl Into<String>,
        script: AdversaryScript,
        delivery: DeliveryMode,
    ) -> Self {
        Self {
            name: name.into(),
            scope: scope.into(),
            script,
            delivery,
            own_token: None,
            cross_targets: Vec::new(),
            loot: Vec::new(),
            redeemed_devices: BTreeSet::new(),
            last_attempt: BTreeMap::new(),
            stockpile: Vec::new(),
        }
    }

    pub fn kind(&self) -> AdversaryKind {
        self.script.kind
    }

    /// The token this adversary redeems for (its own session, or garbage for
    /// an eater that only wants the side effect).
    pub fn set_own_token(&mut self, token: SessionToken) {
        self.own_token = Some(token);
    }

    pub fn own_token(&self) -> Option<&SessionToken> {
        self.own_token.as_ref()
    }

    /// Additional sessions the adversary will (mis)deliver its vouchers to.
    pub fn add_cross_target(&mut self, token: SessionToken) {
        self.cross_targets.push(token);
    }

    /// Absolute times the harness must wake this adversary at.
    pub fn wakeup_times(&self) -> Vec<u64> {
        let mut times = self.script.replay_at.clone();
        if let Some(at) = self.script.deliver_at {
            times.push(at);
        }
        times
    }

    fn harvesting(&self, now: u64) -> bool {
        match self.script.harvest_window {
            Some((start, end)) => now >= start && now <= end,
            None => true,
        }
    }

    /// React to a broadcast overheard in the adversary's scope.
    pub fn on_advertisement(&mut self, now: u64, advertisement: &Advertisement) -> Vec<AdversaryAction> {
        if !self.harvesting(now) {
            return Vec::new();
        }
        match self.script.kind {
            AdversaryKind::Replayer => {
                self.loot.push(advertisement.clone());
                Vec::new()
            }
            AdversaryKind::Miner => {
                let Some(token) = &self.own_token else { return Vec::new() };
                if self.redeemed_devices.contains(&advertisement.device_id) {
                    return Vec::new();
                }
                self.redeemed_devices.insert(advertisement.device_id.clone());
                vec![AdversaryAction::Verify {
                    manufacturer_url: advertisement.manufacturer_url.clone(),
                    request: VerificationRequest {
                        device_id: advertisement.device_id.clone(),
                        totp_code: advertisement.totp_code.clone(),
                        session_token: token.clone(),
                    },
                }]
            }
            AdversaryKind::Eater => {
                let Some(token) = &self.own_token else { return Vec::new() };
                if let Some(last) = self.last_attempt.get(&advertisement.device_id) {
                    if now.saturating_sub(*last) < self.script.request_rate_s {
                        return Vec::new();
                    }
                }
                self.last_attempt.insert(advertisement.device_id.clone(), now);
                vec![AdversaryAction::Verify {
                    manufacturer_url: advertisement.manufacturer_url.clone(),
                    request: VerificationRequest {
                        device_id: advertisement.device_id.clone(),
                        totp_code: advertisement.totp_code.clone(),
                        session_token: token.clone(),
                    },
                }]
            }
        }
    }

    /// React to a voucher won from a manufacturer.
    pub fn on_voucher(&mut self, _now: u64, voucher: &TrustVoucher) -> Vec<AdversaryAction> {
        match self.script.kind {
            // discarding the voucher IS the attack
            AdversaryKind::Eater => Vec::new(),
            // replays are expected to be refused; if one slips through,
            // treat the winnings like a miner would
            AdversaryKind::Replayer | AdversaryKind::Miner => {
                if self.script.deliver_at.is_some() {
                    self.stockpile.push(voucher.clone());
                    Vec::new()
                } else {
                    self.deliveries_for(voucher)
                }
            }
        }
    }

    /// Scheduled wakeup: replays fire, stockpiles flush.
    pub fn wake(&mut self, now: u64) -> Vec<AdversaryAction> {
        let mut actions = Vec::new();
        if self.script.replay_at.contains(&now) {
            let Some(token) = self.own_token.clone() else { return actions };
            for advertisement in &self.loot {
                actions.push(AdversaryAction::Verify {
                    manufacturer_url: advertisement.manufacturer_url.clone(),
                    request: VerificationRequest {
                        device_id: advertisement.device_id.clone(),
                        totp_code: advertisement.totp_code.clone(),
                        session_token: token.clone(),
                    },
                });
            }
        }
        if self.script.deliver_at == Some(now) {
            for voucher in std::mem::take(&mut self.stockpile) {
                actions.extend(self.deliveries_for(&voucher));
            }
        }
        actions
    }

    fn deliveries_for(&self, voucher: &TrustVoucher) -> Vec<AdversaryAction> {
        let mut actions = Vec::new();
        // in a direct deployment the manufacturer already posted the voucher
        // to the adversary's own session; repeating that gains nothing
        if self.delivery == DeliveryMode::Relayed {
            if let Some(own) = &self.own_token {
                actions.push(AdversaryAction::Deliver {
                    target: own.clone(),
                    voucher: voucher.clone(),
                });
            }
        }
        for target in &self.cross_targets {
            actions.push(AdversaryAction::Deliver { target: target.clone(), voucher: voucher.clone() });
        }
        actions
    }
}
