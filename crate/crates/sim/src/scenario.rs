use std::collections::BTreeSet;

use thiserror::Error;

use trustware_core::{DeliveryMode, DeviceId, DeviceSecret, RejectionReason, SessionStatus, TrustPolicy};
use trustware_devices::{AdversaryKind, DeviceBehavior};
use trustware_manufacturer::TrustHeuristic;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario config: {0}")]
    ConfigInvalid(String),
    #[error("scenario deadlock: sessions still pending with no events left: {0:?}")]
    Deadlock(Vec<String>),
    #[error("harness io: {0}")]
    Io(#[from] std::io::Error),
    #[error("harness internal: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClockMode {
    /// Scheduler-driven time; runs are deterministic and instant.
    Virtual,
    /// Wall-clock time; for live demos only.
    Real,
}

impl ClockMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Virtual => "virtual",
            Self::Real => "real",
        }
    }
}

/// One manufacturer to host, with its trust policy knobs. Signing keys are
/// derived from the scenario seed.
#[derive(Debug, Clone)]
pub struct ManufacturerSpec {
    pub name: String,
    pub heuristic: TrustHeuristic,
    pub skew_intervals: u32,
}

impl ManufacturerSpec {
    pub fn new(name: &str) -> Self {
        Self { name: name.into(), heuristic: TrustHeuristic::default(), skew_intervals: 1 }
    }
}

/// One emulated device. Unless `preset` pins an identity (roster files do),
/// the device is provisioned at its manufacturer during setup.
#[derive(Debug, Clone)]
pub struct DeviceSpec {
    pub name: String,
    pub manufacturer: String,
    pub scope: String,
    pub clock_offset_s: i64,
    pub behavior: DeviceBehavior,
    /// Broadcast cadence; the protocol leaves it open, 5 seconds here.
    pub advertise_every_s: u64,
    pub first_advertise_at: u64,
    pub preset: Option<(DeviceId, DeviceSecret)>,
}

impl DeviceSpec {
    pub fn new(name: &str, manufacturer: &str, scope: &str) -> Self {
        Self {
            name: name.into(),
            manufacturer: manufacturer.into(),
            scope: scope.into(),
            clock_offset_s: 0,
            behavior: DeviceBehavior::Honest,
            advertise_every_s: 5,
            first_advertise_at: 0,
            preset: None,
        }
    }

    pub fn offset(mut self, seconds: i64) -> Self {
        self.clock_offset_s = seconds;
        self
    }
}

/// One honest client agent; opens its session at `open_at` (relative).
#[derive(Debug, Clone)]
pub struct AgentSpec {
    pub name: String,
    pub scope: String,
    pub open_at: u64,
}

/// One scripted adversary. All times are relative to scenario start.
#[derive(Debug, Clone)]
pub struct AdversarySpec {
    pub name: String,
    pub scope: String,
    pub kind: AdversaryKind,
    /// When to open a session at the relying party for the adversary's own
    /// token. `None` gives it a random garbage token instead (eaters).
    pub opens_session_at: Option<u64>,
    pub harvest_window: Option<(u64, u64)>,
    pub replay_at: Vec<u64>,
    pub deliver_at: Option<u64>,
    pub request_rate_s: u64,
    /// Actors whose sessions also receive this adversary's vouchers — the
    /// cross-session misdelivery that token binding must refuse.
    pub cross_targets: Vec<String>,
}

impl AdversarySpec {
    pub fn new(name: &str, scope: &str, kind: AdversaryKind) -> Self {
        Self {
            name: name.into(),
            scope: scope.into(),
            kind,
            opens_session_at: None,
            harvest_window: None,
            replay_at: Vec::new(),
            deliver_at: None,
            request_rate_s: 10,
            cross_targets: Vec::new(),
        }
    }
}

/// Pass/fail expectations a scenario carries with it.
#[derive(Debug, Clone)]
pub enum Assertion {
    SessionStatus { actor: String, status: SessionStatus },
    SessionTotal { actor: String, total: u64 },
    /// decided_at - created_at equals exactly this many seconds.
    DecidedElapsed { actor: String, elapsed_s: u64 },
    GrantedBeforeDeadline { actor: String },
    RejectionAtLeast { reason: RejectionReason, count: u64 },
    /// Voucher trust values issued for a device, in order, exactly.
    VoucherTrusts { device: String, trusts: Vec<u8> },
    NoVerifyRequestsBy { actor: String },
    AllMessagesUnder { bytes: u64 },
    /// Run the scenario in both delivery modes and require identical final
    /// decisions and totals per actor.
    ModesAgree,
}

/// A complete scenario description.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    pub clock_mode: ClockMode,
    /// Virtual epoch the clock starts at.
    pub start_time: u64,
    pub duration_s: u64,
    pub delivery_mode: DeliveryMode,
    /// True when the scenario is only meaningful in its configured delivery
    /// mode (stockpiling attacks need the attacker holding the voucher).
    pub mode_pinned: bool,
    pub policy: TrustPolicy,
    pub manufacturers: Vec<ManufacturerSpec>,
    pub devices: Vec<DeviceSpec>,
    pub agents: Vec<AgentSpec>,
    pub adversaries: Vec<AdversarySpec>,
    pub assertions: Vec<Assertion>,
}

/// Default virtual epoch: a round timestamp divisible by the 30-second TOTP
/// interval, so scenario-relative times line up with interval boundaries.
pub const DEFAULT_START_TIME: u64 = 1_699_999_980;

impl ScenarioConfig {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            seed: 42,
            clock_mode: ClockMode::Virtual,
            start_time: DEFAULT_START_TIME,
            duration_s: 60,
            delivery_mode: DeliveryMode::Relayed,
            mode_pinned: false,
            policy: TrustPolicy::default(),
            manufacturers: Vec::new(),
            devices: Vec::new(),
            agents: Vec::new(),
            adversaries: Vec::new(),
            assertions: Vec::new(),
        }
    }

    /// Reject configs that reference missing actors or cannot run.
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |why: String| Err(SimError::ConfigInvalid(why));
        if self.name.is_empty() {
            return bad("scenario name must be non-empty".into());
        }
        if self.duration_s == 0 {
            return bad("duration must be positive".into());
        }
        self.policy
            .validate()
            .map_err(|e| SimError::ConfigInvalid(e.to_string()))?;

        let manufacturer_names: BTreeSet<&str> =
            self.manufacturers.iter().map(|m| m.name.as_str()).collect();
        if manufacturer_names.len() != self.manufacturers.len() {
            return bad("manufacturer names must be unique".into());
        }
        for m in &self.manufacturers {
            trustware_core::ManufacturerName::parse(&m.name)
                .map_err(|e| SimError::ConfigInvalid(format!("manufacturer {:?}: {e}", m.name)))?;
        }

        let mut actor_names = BTreeSet::new();
        for name in self
            .devices
            .iter()
            .map(|d| &d.name)
            .chain(self.agents.iter().map(|a| &a.name))
            .chain(self.adversaries.iter().map(|a| &a.name))
        {
            if name.is_empty() {
                return bad("actor names must be non-empty".into());
            }
            if !actor_names.insert(name.clone()) {
                return bad(format!("duplicate actor name {name:?}"));
            }
        }

        for device in &self.devices {
            if !manufacturer_names.contains(device.manufacturer.as_str()) {
                return bad(format!(
                    "device {:?} references unknown manufacturer {:?}",
                    device.name, device.manufacturer
                ));
            }
            if device.advertise_every_s == 0 {
                return bad(format!("device {:?} advertise cadence must be positive", device.name));
            }
            if device.clock_offset_s < 0
                && self.clock_mode == ClockMode::Virtual
                && (self.start_time as i64 + device.clock_offset_s) < 0
            {
                return bad(format!("device {:?} clock would precede the epoch", device.name));
            }
        }

        let session_actors: BTreeSet<&str> = self
            .agents
            .iter()
            .map(|a| a.name.as_str())
            .chain(
                self.adversaries
                    .iter()
                    .filter(|a| a.opens_session_at.is_some())
                    .map(|a| a.name.as_str()),
            )
            .collect();
        for adversary in &self.adversaries {
            for target in &adversary.cross_targets {
                if !session_actors.contains(target.as_str()) {
                    return bad(format!(
                        "adversary {:?} cross-target {target:?} never opens a session",
                        adversary.name
                    ));
                }
            }
            if adversary.kind == AdversaryKind::Eater && adversary.request_rate_s == 0 {
                return bad(format!("eater {:?} needs a positive request rate", adversary.name));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::new("t");
        cfg.manufacturers.push(ManufacturerSpec::new("acme"));
        cfg.devices.push(DeviceSpec::new("d1", "acme", "home"));
        cfg.agents.push(AgentSpec { name: "alice".into(), scope: "home".into(), open_at: 0 });
        cfg
    }

    #[test]
    fn minimal_config_validates() {
        assert!(minimal().validate().is_ok());
    }

    #[test]
    fn unknown_manufacturer_is_invalid() {
        let mut cfg = minimal();
        cfg.devices[0].manufacturer = "nonesuch".into();
        assert!(matches!(cfg.validate(), Err(SimError::ConfigInvalid(_))));
    }

    #[test]
    fn duplicate_actor_names_invalid() {
        let mut cfg = minimal();
        cfg.agents.push(AgentSpec { name: "d1".into(), scope: "home".into(), open_at: 0 });
        assert!(matches!(cfg.validate(), Err(SimError::ConfigInvalid(_))));
    }

    #[test]
    fn cross_target_must_open_a_session() {
        let mut cfg = minimal();
        let mut adversary = AdversarySpec::new("mallory", "home", AdversaryKind::Miner);
        adversary.opens_session_at = Some(0);
        adversary.cross_targets.push("ghost".into());
        cfg.adversaries.push(adversary);
        assert!(matches!(cfg.validate(), Err(SimError::ConfigInvalid(_))));
    }

    #[test]
    fn pre_epoch_device_clock_invalid() {
        let mut cfg = minimal();
        cfg.start_time = 10;
        cfg.devices[0].clock_offset_s = -100;
        assert!(matches!(cfg.validate(), Err(SimError::ConfigInvalid(_))));
    }
}
