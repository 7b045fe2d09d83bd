//! The built-in scenario suite: the honest protocol path plus every
//! documented limitation, each with assertions that pin its outcome.

use trustware_core::{DeliveryMode, RejectionReason, SessionStatus, TrustPolicy};
use trustware_devices::AdversaryKind;

use crate::scenario::{
    AdversarySpec, AgentSpec, Assertion, DeviceSpec, ManufacturerSpec, ScenarioConfig,
};

/// Names of all built-in scenarios, in presentation order.
pub fn names() -> Vec<&'static str> {
    vec![
        "legit-two-devices",
        "timeout-no-devices",
        "clock-skew-30",
        "clock-skew-60",
        "clock-skew-90",
        "shared-device",
        "remote-access",
        "replay-attack",
        "trust-mining",
        "mining-expiry",
        "trust-eating",
        "delivery-mode-equivalence",
    ]
}

/// Look up a built-in scenario by name.
pub fn by_name(name: &str) -> Option<ScenarioConfig> {
    let cfg = match name {
        "legit-two-devices" => legit_two_devices(),
        "timeout-no-devices" => timeout_no_devices(),
        "clock-skew-30" => clock_skew(30),
        "clock-skew-60" => clock_skew(60),
        "clock-skew-90" => clock_skew(90),
        "shared-device" => shared_device(),
        "remote-access" => remote_access(),
        "replay-attack" => replay_attack(),
        "trust-mining" => trust_mining(),
        "mining-expiry" => mining_expiry(),
        "trust-eating" => trust_eating(),
        "delivery-mode-equivalence" => delivery_mode_equivalence(),
        _ => return None,
    };
    Some(cfg)
}

fn granted(actor: &str) -> Assertion {
    Assertion::SessionStatus { actor: actor.into(), status: SessionStatus::Granted }
}

fn denied(actor: &str) -> Assertion {
    Assertion::SessionStatus { actor: actor.into(), status: SessionStatus::Denied }
}

fn size_budget() -> Assertion {
    Assertion::AllMessagesUnder { bytes: 1024 }
}

/// Two fresh devices from two manufacturers vouch 100 each; the first
/// acceptance already meets the default threshold of 100.
fn legit_two_devices() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new("legit-two-devices");
    cfg.duration_s = 40;
    cfg.manufacturers = vec![ManufacturerSpec::new("acme"), ManufacturerSpec::new("globex")];
    cfg.devices = vec![
        DeviceSpec::new("d1", "acme", "home"),
        DeviceSpec::new("d2", "globex", "home"),
    ];
    cfg.agents = vec![AgentSpec { name: "alice".into(), scope: "home".into(), open_at: 1 }];
    cfg.assertions = vec![
        granted("alice"),
        Assertion::SessionTotal { actor: "alice".into(), total: 100 },
        Assertion::GrantedBeforeDeadline { actor: "alice".into() },
        size_budget(),
    ];
    cfg
}

/// Nobody vouches; the session is denied at exactly the 30-second deadline.
fn timeout_no_devices() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new("timeout-no-devices");
    cfg.duration_s = 35;
    cfg.manufacturers = vec![ManufacturerSpec::new("acme")];
    cfg.agents = vec![AgentSpec { name: "alice".into(), scope: "office".into(), open_at: 0 }];
    cfg.assertions = vec![
        denied("alice"),
        Assertion::SessionTotal { actor: "alice".into(), total: 0 },
        Assertion::DecidedElapsed { actor: "alice".into(), elapsed_s: 30 },
        size_budget(),
    ];
    cfg
}

/// One device whose clock runs `offset` seconds slow. 30 seconds of skew is
/// inside the adjacent-interval window; 60 and 90 are not.
fn clock_skew(offset: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(&format!("clock-skew-{offset}"));
    cfg.duration_s = 40;
    cfg.manufacturers = vec![ManufacturerSpec::new("acme")];
    cfg.devices = vec![DeviceSpec::new("d1", "acme", "home").offset(-(offset as i64))];
    cfg.agents = vec![AgentSpec { name: "alice".into(), scope: "home".into(), open_at: 1 }];
    cfg.assertions = if offset <= 30 {
        vec![granted("alice"), Assertion::GrantedBeforeDeadline { actor: "alice".into() }, size_budget()]
    } else {
        vec![
            denied("alice"),
            Assertion::RejectionAtLeast { reason: RejectionReason::BadTotp, count: 1 },
            size_budget(),
        ]
    };
    cfg
}

/// A library computer vouches for two users in a row, 10 seconds apart. The
/// first session gets full trust; the shared device is worth only 50 to the
/// second.
fn shared_device() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new("shared-device");
    cfg.duration_s = 65;
    cfg.manufacturers = vec![ManufacturerSpec::new("acme")];
    cfg.devices = vec![DeviceSpec::new("d1", "acme", "library")];
    cfg.agents = vec![
        AgentSpec { name: "alice".into(), scope: "library".into(), open_at: 18 },
        AgentSpec { name: "bob".into(), scope: "library".into(), open_at: 28 },
    ];
    cfg.assertions = vec![
        granted("alice"),
        denied("bob"),
        Assertion::VoucherTrusts { device: "d1".into(), trusts: vec![100, 50] },
        Assertion::SessionTotal { actor: "bob".into(), total: 50 },
        Assertion::DecidedElapsed { actor: "bob".into(), elapsed_s: 30 },
        size_budget(),
    ];
    cfg
}

/// The client works on a remote machine: its agent's scope contains no
/// devices, so no trust ever arrives and the session times out.
fn remote_access() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new("remote-access");
    cfg.duration_s = 35;
    cfg.manufacturers = vec![ManufacturerSpec::new("acme")];
    cfg.devices = vec![DeviceSpec::new("d1", "acme", "home")];
    cfg.agents = vec![AgentSpec { name: "alice".into(), scope: "remote".into(), open_at: 0 }];
    cfg.assertions = vec![
        denied("alice"),
        Assertion::NoVerifyRequestsBy { actor: "alice".into() },
        Assertion::DecidedElapsed { actor: "alice".into(), elapsed_s: 30 },
        size_budget(),
    ];
    cfg
}

/// Eve overhears the first advertisements and resubmits them under her own
/// token: at 15 seconds the interval is consumed (replay defense), at 95
/// seconds the code has left the window entirely.
fn replay_attack() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new("replay-attack");
    cfg.duration_s = 100;
    cfg.manufacturers = vec![ManufacturerSpec::new("acme")];
    cfg.devices = vec![DeviceSpec::new("d1", "acme", "home")];
    cfg.agents = vec![AgentSpec { name: "alice".into(), scope: "home".into(), open_at: 0 }];
    let mut eve = AdversarySpec::new("eve", "home", AdversaryKind::Replayer);
    eve.opens_session_at = Some(2);
    eve.harvest_window = Some((0, 10));
    eve.replay_at = vec![15, 95];
    cfg.adversaries = vec![eve];
    cfg.assertions = vec![
        granted("alice"),
        denied("eve"),
        Assertion::SessionTotal { actor: "eve".into(), total: 0 },
        Assertion::RejectionAtLeast { reason: RejectionReason::ReplayedCode, count: 3 },
        Assertion::RejectionAtLeast { reason: RejectionReason::BadTotp, count: 3 },
        size_budget(),
    ];
    cfg
}

/// Mallory redeems the cafe's devices for her own prespecified token before
/// the legitimate visitor can, and her vouchers are refused by the victim's
/// session (token binding).
fn trust_mining() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new("trust-mining");
    cfg.duration_s = 40;
    cfg.manufacturers = vec![ManufacturerSpec::new("acme")];
    cfg.devices = vec![
        DeviceSpec::new("d1", "acme", "cafe"),
        DeviceSpec::new("d2", "acme", "cafe"),
    ];
    let mut mallory = AdversarySpec::new("mallory", "cafe", AdversaryKind::Miner);
    mallory.opens_session_at = Some(0);
    mallory.cross_targets = vec!["bob".into()];
    cfg.adversaries = vec![mallory];
    // both sessions exist before the first broadcast; the miner still wins
    // the race because radio snooping reacts ahead of the browser
    cfg.agents = vec![AgentSpec { name: "bob".into(), scope: "cafe".into(), open_at: 0 }];
    cfg.assertions = vec![
        granted("mallory"),
        Assertion::SessionTotal { actor: "mallory".into(), total: 100 },
        denied("bob"),
        Assertion::SessionTotal { actor: "bob".into(), total: 0 },
        Assertion::RejectionAtLeast { reason: RejectionReason::TokenMismatch, count: 2 },
        Assertion::RejectionAtLeast { reason: RejectionReason::RateLimited, count: 2 },
        size_budget(),
    ];
    cfg
}

/// Stockpiled trust expires: the miner sits on a voucher for 61 seconds and
/// the relying party refuses it as stale. Pinned to relayed delivery — the
/// attack presupposes the attacker holds the voucher, which a direct
/// deployment never lets happen.
fn mining_expiry() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new("mining-expiry");
    cfg.duration_s = 165;
    cfg.mode_pinned = true;
    cfg.delivery_mode = DeliveryMode::Relayed;
    cfg.policy = TrustPolicy { session_timeout_s: 120, ..TrustPolicy::default() };
    cfg.manufacturers = vec![ManufacturerSpec::new("acme")];
    cfg.devices = vec![DeviceSpec::new("d1", "acme", "cafe")];
    let mut mallory = AdversarySpec::new("mallory", "cafe", AdversaryKind::Miner);
    mallory.opens_session_at = Some(0);
    mallory.deliver_at = Some(66); // voucher minted at t=5, held 61 seconds
    mallory.harvest_window = Some((0, 10));
    mallory.cross_targets = vec!["victim".into()];
    cfg.adversaries = vec![mallory];
    cfg.agents = vec![AgentSpec { name: "victim".into(), scope: "office".into(), open_at: 40 }];
    cfg.assertions = vec![
        denied("mallory"),
        Assertion::SessionTotal { actor: "mallory".into(), total: 0 },
        Assertion::DecidedElapsed { actor: "mallory".into(), elapsed_s: 120 },
        denied("victim"),
        Assertion::RejectionAtLeast { reason: RejectionReason::StaleVoucher, count: 1 },
        Assertion::RejectionAtLeast { reason: RejectionReason::TokenMismatch, count: 1 },
        size_budget(),
    ];
    cfg
}

/// An eater drains a device for a minute and throws the vouchers away. The
/// later legitimate user inherits a reputation of 25 — not enough.
fn trust_eating() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new("trust-eating");
    cfg.duration_s = 125;
    cfg.manufacturers = vec![ManufacturerSpec::new("acme")];
    cfg.devices = vec![DeviceSpec::new("d1", "acme", "library")];
    let mut gluk = AdversarySpec::new("gluk", "library", AdversaryKind::Eater);
    gluk.request_rate_s = 10;
    gluk.harvest_window = Some((0, 60));
    cfg.adversaries = vec![gluk];
    cfg.agents = vec![AgentSpec { name: "carol".into(), scope: "library".into(), open_at: 92 }];
    cfg.assertions = vec![
        // single-use intervals cap the rate-limited 7 to one voucher per
        // 30-second interval: t = 0, 30, 60 for the eater, then carol at 95
        Assertion::VoucherTrusts { device: "d1".into(), trusts: vec![100, 50, 33, 25] },
        denied("carol"),
        Assertion::SessionTotal { actor: "carol".into(), total: 25 },
        Assertion::RejectionAtLeast { reason: RejectionReason::ReplayedCode, count: 4 },
        size_budget(),
    ];
    cfg
}

/// The trust-mining scenario executed in both delivery topologies; final
/// decisions and totals must match exactly.
fn delivery_mode_equivalence() -> ScenarioConfig {
    let mut cfg = trust_mining();
    cfg.name = "delivery-mode-equivalence".into();
    cfg.assertions.push(Assertion::ModesAgree);
    cfg
}
