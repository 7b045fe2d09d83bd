//! Executes scenarios: boots the services on loopback HTTP, provisions the
//! roster, schedules every actor, and drives the virtual clock as the sole
//! source of time. All externally visible effects land in the ledger in
//! schedule order, so a seed pins down the entire run.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use trustware_core::wire::{decode_message, encode_message, WireKind, WireMessage};
use trustware_core::{
    Clock, DeliveryMode, DeviceId, DeviceSecret, Keypair, ManufacturerName, SessionToken,
};
use trustware_devices::{
    Adversary, AdversaryAction, AdversaryScript, AdvertisementBus, AgentHear, ClientAgent,
    EmulatedDevice, Hosts,
};
use trustware_manufacturer::http as mfr_http;
use trustware_manufacturer::{AuthServer, ManufacturerError};
use trustware_relying_party::http as rp_http;
use trustware_relying_party::{ManufacturerRegistry, RelyingParty};

use crate::ledger::{Ledger, LedgerEntry};
use crate::report::{tally_rejections, RunMeta, ScenarioReport, SessionOutcome};
use crate::scenario::{Assertion, ClockMode, ScenarioConfig, SimError};

const RP_LOGICAL_URL: &str = "http://rp.trustware.test";

/// Run a scenario to completion. A `ModesAgree` assertion runs the scenario
/// once per delivery mode and requires identical outcomes; anything else is
/// a single run in the configured mode.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport, SimError> {
    cfg.validate()?;
    if cfg.assertions.iter().any(|a| matches!(a, Assertion::ModesAgree)) {
        run_both_modes(cfg)
    } else {
        let outcome = execute(cfg, "main")?;
        Ok(assemble(cfg, cfg.delivery_mode.as_str(), outcome))
    }
}

fn run_both_modes(cfg: &ScenarioConfig) -> Result<ScenarioReport, SimError> {
    let per_run: Vec<Assertion> = cfg
        .assertions
        .iter()
        .filter(|a| !matches!(a, Assertion::ModesAgree))
        .cloned()
        .collect();

    let mut reports = Vec::new();
    for mode in [DeliveryMode::Relayed, DeliveryMode::Direct] {
        let mut sub = cfg.clone();
        sub.delivery_mode = mode;
        sub.assertions = per_run.clone();
        let outcome = execute(&sub, mode.as_str())?;
        reports.push(assemble(&sub, mode.as_str(), outcome));
    }
    let direct = reports.pop().expect("two runs");
    let relayed = reports.pop().expect("two runs");

    let outcomes_of = |report: &ScenarioReport| -> BTreeMap<String, (String, u64)> {
        report
            .sessions
            .iter()
            .map(|s| (s.actor.clone(), (s.status.clone(), s.total_trust)))
            .collect()
    };
    let relayed_outcomes = outcomes_of(&relayed);
    let direct_outcomes = outcomes_of(&direct);

    let mut failures: Vec<String> = Vec::new();
    failures.extend(relayed.assertion_failures.iter().map(|f| format!("[relayed] {f}")));
    failures.extend(direct.assertion_failures.iter().map(|f| format!("[direct] {f}")));
    if relayed_outcomes != direct_outcomes {
        failures.push(format!(
            "delivery modes disagree: relayed {relayed_outcomes:?} vs direct {direct_outcomes:?}"
        ));
    }

    let mut entries = relayed.entries;
    let offset = entries.len() as u64;
    entries.extend(direct.entries.into_iter().map(|mut e| {
        e.seq += offset;
        e
    }));
    let mut sessions = relayed.sessions;
    sessions.extend(direct.sessions);

    let mut voucher_trusts = BTreeMap::new();
    for (run, source) in [("relayed", &relayed.voucher_trusts), ("direct", &direct.voucher_trusts)] {
        for (device, trusts) in source {
            voucher_trusts.insert(format!("{run}/{device}"), trusts.clone());
        }
    }

    let rejection_counts = tally_rejections(&entries);
    let max_message_bytes = entries.iter().filter_map(|e| e.bytes).max().unwrap_or(0);
    Ok(ScenarioReport {
        meta: RunMeta {
            name: cfg.name.clone(),
            seed: cfg.seed,
            clock: cfg.clock_mode.as_str().into(),
            delivery_mode: "both".into(),
            start_time: cfg.start_time,
            duration_s: cfg.duration_s,
        },
        entries,
        sessions,
        voucher_trusts,
        max_message_bytes,
        rejection_counts,
        assertion_failures: failures,
    })
}

fn assemble(cfg: &ScenarioConfig, mode_label: &str, outcome: SingleOutcome) -> ScenarioReport {
    let rejection_counts = tally_rejections(&outcome.entries);
    let max_message_bytes = outcome.entries.iter().filter_map(|e| e.bytes).max().unwrap_or(0);
    let failures = evaluate_assertions(cfg, &outcome, &rejection_counts, max_message_bytes);
    ScenarioReport {
        meta: RunMeta {
            name: cfg.name.clone(),
            seed: cfg.seed,
            clock: cfg.clock_mode.as_str().into(),
            delivery_mode: mode_label.into(),
            start_time: cfg.start_time,
            duration_s: cfg.duration_s,
        },
        entries: outcome.entries,
        sessions: outcome.sessions,
        voucher_trusts: outcome.voucher_trusts,
        max_message_bytes,
        rejection_counts,
        assertion_failures: failures,
    }
}

struct SingleOutcome {
    entries: Vec<LedgerEntry>,
    sessions: Vec<SessionOutcome>,
    voucher_trusts: BTreeMap<String, Vec<u8>>,
    verify_requests_by_actor: BTreeMap<String, u64>,
}

enum Actor {
    Agent(ClientAgent),
    Adversary(Adversary),
}

#[derive(Debug)]
enum Event {
    OpenSession { actor: usize },
    Advertise { device: usize },
    Wake { actor: usize },
    Deadline { token: SessionToken },
}

struct Schedule {
    queue: BTreeMap<(u64, u64), Event>,
    next: u64,
}

impl Schedule {
    fn new() -> Self {
        Self { queue: BTreeMap::new(), next: 0 }
    }

    fn push(&mut self, t: u64, event: Event) {
        self.queue.insert((t, self.next), event);
        self.next += 1;
    }

    fn pop(&mut self) -> Option<(u64, Event)> {
        let key = *self.queue.keys().next()?;
        let event = self.queue.remove(&key).expect("key just seen");
        Some((key.0, event))
    }
}

fn execute(cfg: &ScenarioConfig, run_label: &str) -> Result<SingleOutcome, SimError> {
    let ledger = Ledger::new(run_label);
    let clock = match cfg.clock_mode {
        ClockMode::Virtual => Clock::virtual_at(cfg.start_time),
        ClockMode::Real => Clock::Real,
    };
    let start = match cfg.clock_mode {
        ClockMode::Virtual => cfg.start_time,
        ClockMode::Real => clock.now_unix(),
    };
    let wall_anchor = std::time::Instant::now();

    // RNG discipline: every random draw comes from streams derived from the
    // seed in a fixed order, so reruns are byte-identical.
    let mut master = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut manufacturer_keys: Vec<(ManufacturerName, Keypair)> = Vec::new();
    let mut registry = ManufacturerRegistry::new();
    for spec in &cfg.manufacturers {
        let mut seed = [0u8; 32];
        master.fill_bytes(&mut seed);
        let keypair = Keypair::from_seed(&seed);
        let name = ManufacturerName::parse(&spec.name).expect("validated");
        registry
            .insert(name.clone(), keypair.public())
            .map_err(|e| SimError::ConfigInvalid(e.to_string()))?;
        manufacturer_keys.push((name, keypair));
    }
    let rp_rng = ChaCha20Rng::seed_from_u64(master.next_u64());
    let provision_seeds: Vec<u64> = cfg.manufacturers.iter().map(|_| master.next_u64()).collect();
    let mut adversary_token_rng = ChaCha20Rng::seed_from_u64(master.next_u64());

    // relying party first: direct-mode manufacturers need its real address
    let rp_state = RelyingParty::new(RP_LOGICAL_URL, cfg.policy.clone(), registry);
    let rp_service = Arc::new(rp_http::RelyingPartyService::new(
        rp_state,
        Box::new(rp_rng),
        clock.clone(),
        rp_hook(&ledger),
    ));
    let rp_handle = rp_http::serve(Arc::clone(&rp_service), "127.0.0.1:0")?;
    let mut hosts = Hosts::new();
    hosts.register(RP_LOGICAL_URL, rp_handle.base_url());
    let rp_real_url = rp_handle.base_url();

    let mut manufacturer_services = Vec::new();
    let mut manufacturer_handles = Vec::new();
    for (idx, spec) in cfg.manufacturers.iter().enumerate() {
        let (name, keypair) = &manufacturer_keys[idx];
        let logical_base = format!("http://{}.trustware.test", spec.name);
        let auth = AuthServer::new(
            name.clone(),
            format!("{logical_base}/verify"),
            keypair.clone(),
            spec.heuristic,
            spec.skew_intervals,
        );
        let service = Arc::new(mfr_http::ManufacturerService::new(
            auth,
            Box::new(ChaCha20Rng::seed_from_u64(provision_seeds[idx])),
            clock.clone(),
            cfg.delivery_mode,
            Some(rp_real_url.clone()),
            mfr_hook(&ledger, &spec.name),
        ));
        let handle = mfr_http::serve(Arc::clone(&service), "127.0.0.1:0")
            .map_err(|e| SimError::Internal(e.to_string()))?;
        hosts.register(logical_base, handle.base_url());
        manufacturer_services.push(service);
        manufacturer_handles.push(handle);
    }

    // roster: provision over the wire (or import preset identities)
    let mut devices: Vec<(String, EmulatedDevice, String)> = Vec::new(); // (actor, device, scope)
    let mut device_actor_by_id: BTreeMap<String, String> = BTreeMap::new();
    for spec in &cfg.devices {
        let mfr_idx = cfg
            .manufacturers
            .iter()
            .position(|m| m.name == spec.manufacturer)
            .expect("validated");
        let logical_verify = format!("http://{}.trustware.test/verify", spec.manufacturer);
        let (device_id, secret) = match &spec.preset {
            Some((id, secret)) => {
                let mut state = manufacturer_services[mfr_idx]
                    .state()
                    .lock()
                    .expect("auth server lock");
                state
                    .register_device(id.clone(), secret.clone(), start)
                    .map_err(|e: ManufacturerError| SimError::ConfigInvalid(e.to_string()))?;
                (id.clone(), secret.clone())
            }
            None => {
                let url = format!(
                    "{}/provision",
                    hosts.resolve(&format!("http://{}.trustware.test", spec.manufacturer))
                );
                let (status, body) = http_post(&url, &[]).map_err(SimError::Internal)?;
                if status != 200 {
                    return Err(SimError::Internal(format!("provision failed with {status}")));
                }
                parse_provision_response(&body)?
            }
        };
        device_actor_by_id.insert(device_id.to_string(), spec.name.clone());
        devices.push((
            spec.name.clone(),
            EmulatedDevice {
                device_id,
                secret,
                manufacturer_url: logical_verify,
                clock_offset_s: spec.clock_offset_s,
                behavior: spec.behavior,
            },
            spec.scope.clone(),
        ));
    }

    // cast: adversaries subscribe ahead of honest agents — radio snoops react
    // faster than the browser in these demos
    let mut actors: Vec<(String, Actor)> = Vec::new();
    let mut bus = AdvertisementBus::new();
    for spec in &cfg.adversaries {
        let script = AdversaryScript {
            kind: spec.kind,
            harvest_window: spec.harvest_window.map(|(a, b)| (start + a, start + b)),
            replay_at: spec.replay_at.iter().map(|t| start + t).collect(),
            deliver_at: spec.deliver_at.map(|t| start + t),
            request_rate_s: spec.request_rate_s,
        };
        let mut adversary = Adversary::new(&spec.name, &spec.scope, script, cfg.delivery_mode);
        if spec.opens_session_at.is_none() {
            // no session of its own: redeem against a throwaway token
            adversary.set_own_token(SessionToken::generate(&mut adversary_token_rng));
        }
        bus.subscribe(&spec.name, &spec.scope);
        actors.push((spec.name.clone(), Actor::Adversary(adversary)));
    }
    let adversary_count = cfg.adversaries.len();
    for spec in &cfg.agents {
        bus.subscribe(&spec.name, &spec.scope);
        actors.push((
            spec.name.clone(),
            Actor::Agent(ClientAgent::new(&spec.name, &spec.scope, cfg.delivery_mode)),
        ));
    }

    let mut schedule = Schedule::new();
    for (idx, spec) in cfg.adversaries.iter().enumerate() {
        if let Some(open_at) = spec.opens_session_at {
            schedule.push(start + open_at, Event::OpenSession { actor: idx });
        }
        for t in spec.replay_at.iter().copied() {
            schedule.push(start + t, Event::Wake { actor: idx });
        }
        if let Some(t) = spec.deliver_at {
            schedule.push(start + t, Event::Wake { actor: idx });
        }
    }
    for (idx, spec) in cfg.agents.iter().enumerate() {
        schedule.push(start + spec.open_at, Event::OpenSession { actor: adversary_count + idx });
    }
    for (idx, spec) in cfg.devices.iter().enumerate() {
        schedule.push(start + spec.first_advertise_at, Event::Advertise { device: idx });
    }

    let mut actor_sessions: BTreeMap<usize, SessionToken> = BTreeMap::new();
    let mut verify_requests_by_actor: BTreeMap<String, u64> = BTreeMap::new();

    while let Some((t, event)) = schedule.pop() {
        match cfg.clock_mode {
            ClockMode::Virtual => clock.set(t),
            ClockMode::Real => {
                let rel = t.saturating_sub(start);
                let target = wall_anchor + std::time::Duration::from_secs(rel);
                if let Some(wait) = target.checked_duration_since(std::time::Instant::now()) {
                    std::thread::sleep(wait);
                }
            }
        }
        let now = clock.now_unix();

        match event {
            Event::OpenSession { actor } => {
                let (status, body) =
                    http_post(&format!("{rp_real_url}/session"), &[]).map_err(SimError::Internal)?;
                if status != 200 {
                    return Err(SimError::Internal(format!("session open failed with {status}")));
                }
                let WireMessage::SessionOffer(offer) =
                    decode_message(&body, WireKind::SessionOffer)
                        .map_err(|e| SimError::Internal(e.to_string()))?
                else {
                    unreachable!("decode_message returns the requested kind");
                };
                let token = offer.session_token.clone();
                schedule.push(offer.expires_at, Event::Deadline { token: token.clone() });
                actor_sessions.insert(actor, token.clone());
                // adversaries aiming at this actor's session learn the token
                let actor_name = actors[actor].0.clone();
                for (adv_idx, spec) in cfg.adversaries.iter().enumerate() {
                    if spec.cross_targets.contains(&actor_name) {
                        if let Actor::Adversary(adversary) = &mut actors[adv_idx].1 {
                            adversary.add_cross_target(token.clone());
                        }
                    }
                }
                match &mut actors[actor].1 {
                    Actor::Agent(agent) => agent.adopt_session(offer),
                    Actor::Adversary(adversary) => adversary.set_own_token(token),
                }
            }
            Event::Advertise { device } => {
                let (device_name, emulated, scope) = &devices[device];
                if let Some(advertisement) = emulated.advertise(now) {
                    let bytes =
                        encode_message(&WireMessage::Advertisement(advertisement.clone()))
                            .map_err(|e| SimError::Internal(e.to_string()))?;
                    let mut entry = LedgerEntry::new(now, device_name.clone(), "advertise");
                    entry.message = Some("advertisement".into());
                    entry.device = Some(emulated.device_id.to_string());
                    entry.bytes = Some(bytes.len() as u64);
                    ledger.push(entry);

                    let listeners: Vec<usize> = bus
                        .listeners_in_scope(scope)
                        .iter()
                        .filter_map(|name| actors.iter().position(|(n, _)| n == name))
                        .collect();
                    for listener in listeners {
                        let mut worklist: VecDeque<AdversaryAction> = VecDeque::new();
                        let actor_name = actors[listener].0.clone();
                        match &mut actors[listener].1 {
                            Actor::Agent(agent) => match agent.hear(&bytes) {
                                AgentHear::Request { manufacturer_url, request } => {
                                    *verify_requests_by_actor
                                        .entry(actor_name.clone())
                                        .or_default() += 1;
                                    let relay = agent.relays_vouchers();
                                    let own_token = request.session_token.clone();
                                    if let Some(voucher) = submit_verification(
                                        &ledger,
                                        &hosts,
                                        now,
                                        &actor_name,
                                        &manufacturer_url,
                                        &request,
                                    ) {
                                        if relay {
                                            deliver_voucher(
                                                &hosts, &own_token, &voucher,
                                            );
                                        }
                                    }
                                }
                                AgentHear::Malformed => {
                                    let mut entry = LedgerEntry::new(
                                        now,
                                        actor_name.clone(),
                                        "advertisement_dropped",
                                    );
                                    entry.note = Some("malformed advertisement".into());
                                    ledger.push(entry);
                                }
                                AgentHear::AlreadyRequested | AgentHear::NoSession => {}
                            },
                            Actor::Adversary(adversary) => {
                                worklist.extend(adversary.on_advertisement(now, &advertisement));
                            }
                        }
                        drain_adversary_actions(
                            &ledger,
                            &hosts,
                            now,
                            &mut actors[listener],
                            &mut verify_requests_by_actor,
                            worklist,
                        );
                    }
                }
                let next = t + cfg.devices[device].advertise_every_s;
                if next <= start + cfg.duration_s {
                    schedule.push(next, Event::Advertise { device });
                }
            }
            Event::Wake { actor } => {
                let mut worklist: VecDeque<AdversaryAction> = VecDeque::new();
                if let Actor::Adversary(adversary) = &mut actors[actor].1 {
                    worklist.extend(adversary.wake(now));
                }
                drain_adversary_actions(
                    &ledger,
                    &hosts,
                    now,
                    &mut actors[actor],
                    &mut verify_requests_by_actor,
                    worklist,
                );
            }
            Event::Deadline { token } => {
                let url = format!("{rp_real_url}/decision?token={token}");
                let _ = http_get(&url); // the relying party settles and records it
            }
        }
    }

    // collect outcomes
    let mut sessions = Vec::new();
    let mut still_pending = Vec::new();
    {
        let rp = rp_service.state().lock().expect("rp lock");
        for (idx, (name, _)) in actors.iter().enumerate() {
            let Some(token) = actor_sessions.get(&idx) else { continue };
            let session = rp
                .session(token)
                .expect("session opened during the run");
            if session.status == trustware_core::SessionStatus::Pending {
                still_pending.push(name.clone());
            }
            sessions.push(SessionOutcome {
                run: run_label.into(),
                actor: name.clone(),
                session: token.to_string(),
                status: session.status.as_str().into(),
                total_trust: session.total_trust,
                created_at: session.created_at,
                decided_at: session.decided_at,
                elapsed_s: session.decided_at.map(|d| d - session.created_at),
            });
        }
    }

    for handle in manufacturer_handles {
        handle.stop();
    }
    rp_handle.stop();

    if !still_pending.is_empty() {
        return Err(SimError::Deadlock(still_pending));
    }

    let entries = ledger.snapshot();
    let mut voucher_trusts: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    for entry in &entries {
        if entry.kind == "voucher_issued" {
            if let (Some(device), Some(trust)) = (&entry.device, entry.trust) {
                let actor = device_actor_by_id.get(device).cloned().unwrap_or_else(|| device.clone());
                voucher_trusts.entry(actor).or_default().push(trust as u8);
            }
        }
    }

    Ok(SingleOutcome { entries, sessions, voucher_trusts, verify_requests_by_actor })
}

/// Encode, record, and post one verification request; returns the voucher on
/// success. Rejections are recorded by the manufacturer's own hook.
fn submit_verification(
    ledger: &Ledger,
    hosts: &Hosts,
    now: u64,
    actor: &str,
    manufacturer_url: &str,
    request: &trustware_core::VerificationRequest,
) -> Option<trustware_core::TrustVoucher> {
    let bytes = encode_message(&WireMessage::VerificationRequest(request.clone()))
        .expect("request fits the budget");
    let mut entry = LedgerEntry::new(now, actor, "verify_request");
    entry.message = Some("verification_request".into());
    entry.device = Some(request.device_id.to_string());
    entry.session = Some(request.session_token.to_string());
    entry.bytes = Some(bytes.len() as u64);
    ledger.push(entry);

    match http_post(&hosts.resolve(manufacturer_url), &bytes) {
        Ok((200, body)) => match decode_message(&body, WireKind::TrustVoucher) {
            Ok(WireMessage::TrustVoucher(voucher)) => Some(voucher),
            _ => {
                let mut entry = LedgerEntry::new(now, actor, "protocol_error");
                entry.note = Some("verify response was not a voucher".into());
                ledger.push(entry);
                None
            }
        },
        Ok((_, _)) => None, // rejection: the manufacturer hook recorded it
        Err(why) => {
            let mut entry = LedgerEntry::new(now, actor, "manufacturer_unreachable");
            entry.note = Some(why);
            ledger.push(entry);
            None
        }
    }
}

/// Post a voucher to the relying party for a specific session. The relying
/// party's hook records acceptance or rejection.
fn deliver_voucher(hosts: &Hosts, target: &SessionToken, voucher: &trustware_core::TrustVoucher) {
    let bytes = encode_message(&WireMessage::TrustVoucher(voucher.clone()))
        .expect("voucher fits the budget");
    let url = format!("{}/voucher?token={target}", hosts.resolve(RP_LOGICAL_URL));
    let _ = http_post(&url, &bytes);
}

fn drain_adversary_actions(
    ledger: &Ledger,
    hosts: &Hosts,
    now: u64,
    actor: &mut (String, Actor),
    verify_requests_by_actor: &mut BTreeMap<String, u64>,
    mut worklist: VecDeque<AdversaryAction>,
) {
    let name = actor.0.clone();
    while let Some(action) = worklist.pop_front() {
        match action {
            AdversaryAction::Verify { manufacturer_url, request } => {
                *verify_requests_by_actor.entry(name.clone()).or_default() += 1;
                if let Some(voucher) =
                    submit_verification(ledger, hosts, now, &name, &manufacturer_url, &request)
                {
                    if let Actor::Adversary(adversary) = &mut actor.1 {
                        worklist.extend(adversary.on_voucher(now, &voucher));
                    }
                }
            }
            AdversaryAction::Deliver { target, voucher } => {
                deliver_voucher(hosts, &target, &voucher);
            }
        }
    }
}

fn parse_provision_response(body: &[u8]) -> Result<(DeviceId, DeviceSecret), SimError> {
    let value: serde_json::Value = serde_json::from_slice(body)
        .map_err(|e| SimError::Internal(format!("bad provision response: {e}")))?;
    let device_id = value
        .get("device_id")
        .and_then(|v| v.as_str())
        .ok_or_else(|| SimError::Internal("provision response missing device_id".into()))?;
    let secret = value
        .get("secret")
        .and_then(|v| v.as_str())
        .ok_or_else(|| SimError::Internal("provision response missing secret".into()))?;
    Ok((
        DeviceId::parse(device_id).map_err(|e| SimError::Internal(e.to_string()))?,
        DeviceSecret::parse(secret).map_err(|e| SimError::Internal(e.to_string()))?,
    ))
}

fn evaluate_assertions(
    cfg: &ScenarioConfig,
    outcome: &SingleOutcome,
    rejection_counts: &[(String, u64)],
    max_message_bytes: u64,
) -> Vec<String> {
    let mut failures = Vec::new();
    let session_of = |actor: &str| outcome.sessions.iter().find(|s| s.actor == actor);
    let rejections: BTreeMap<&str, u64> =
        rejection_counts.iter().map(|(r, c)| (r.as_str(), *c)).collect();

    for assertion in &cfg.assertions {
        match assertion {
            Assertion::SessionStatus { actor, status } => match session_of(actor) {
                Some(s) if s.status == status.as_str() => {}
                Some(s) => failures.push(format!(
                    "{actor}: expected status {}, got {}",
                    status.as_str(),
                    s.status
                )),
                None => failures.push(format!("{actor}: no session opened")),
            },
            Assertion::SessionTotal { actor, total } => match session_of(actor) {
                Some(s) if s.total_trust == *total => {}
                Some(s) => failures.push(format!(
                    "{actor}: expected total {total}, got {}",
                    s.total_trust
                )),
                None => failures.push(format!("{actor}: no session opened")),
            },
            Assertion::DecidedElapsed { actor, elapsed_s } => match session_of(actor) {
                Some(s) if s.elapsed_s == Some(*elapsed_s) => {}
                Some(s) => failures.push(format!(
                    "{actor}: expected decision after {elapsed_s}s, got {:?}",
                    s.elapsed_s
                )),
                None => failures.push(format!("{actor}: no session opened")),
            },
            Assertion::GrantedBeforeDeadline { actor } => match session_of(actor) {
                Some(s)
                    if s.status == "granted"
                        && s.elapsed_s.is_some_and(|e| e < cfg.policy.session_timeout_s) => {}
                Some(s) => failures.push(format!(
                    "{actor}: expected grant before the {}s deadline, got {} after {:?}s",
                    cfg.policy.session_timeout_s, s.status, s.elapsed_s
                )),
                None => failures.push(format!("{actor}: no session opened")),
            },
            Assertion::RejectionAtLeast { reason, count } => {
                let got = rejections.get(reason.as_str()).copied().unwrap_or(0);
                if got < *count {
                    failures.push(format!(
                        "expected at least {count} {} rejections, got {got}",
                        reason.as_str()
                    ));
                }
            }
            Assertion::VoucherTrusts { device, trusts } => {
                let got = outcome.voucher_trusts.get(device).cloned().unwrap_or_default();
                if got != *trusts {
                    failures.push(format!(
                        "device {device}: expected voucher trusts {trusts:?}, got {got:?}"
                    ));
                }
            }
            Assertion::NoVerifyRequestsBy { actor } => {
                let got = outcome.verify_requests_by_actor.get(actor).copied().unwrap_or(0);
                if got != 0 {
                    failures.push(format!("{actor}: expected no verification requests, sent {got}"));
                }
            }
            Assertion::AllMessagesUnder { bytes } => {
                if max_message_bytes >= *bytes {
                    failures.push(format!(
                        "message of {max_message_bytes} bytes breaches the {bytes}-byte budget"
                    ));
                }
            }
            Assertion::ModesAgree => {} // handled by run_both_modes
        }
    }
    failures
}

fn mfr_hook(ledger: &Ledger, manufacturer: &str) -> mfr_http::MfrHook {
    let ledger = ledger.clone();
    let actor = format!("manufacturer:{manufacturer}");
    Arc::new(move |event| {
        let entry = match event {
            mfr_http::MfrEvent::Provisioned { at, device_id, response_bytes } => {
                let mut e = LedgerEntry::new(*at, actor.clone(), "provision");
                e.device = Some(device_id.to_string());
                e.bytes = Some(*response_bytes as u64);
                e
            }
            mfr_http::MfrEvent::Issued {
                at,
                device_id,
                session_token,
                trust,
                response_bytes,
                ..
            } => {
                let mut e = LedgerEntry::new(*at, actor.clone(), "voucher_issued");
                e.message = Some("trust_voucher".into());
                e.device = Some(device_id.to_string());
                e.session = Some(session_token.to_string());
                e.trust = Some(u64::from(*trust));
                e.bytes = Some(*response_bytes as u64);
                e
            }
            mfr_http::MfrEvent::Rejected { at, device_id, reason, response_bytes, .. } => {
                let mut e = LedgerEntry::new(*at, actor.clone(), "verify_rejected");
                e.message = Some("verification_rejection".into());
                e.device = Some(device_id.to_string());
                e.reason = Some(reason.as_str().into());
                e.bytes = Some(*response_bytes as u64);
                e
            }
            mfr_http::MfrEvent::DirectPosted { at, device_id, session_token, accepted, detail } => {
                let mut e = LedgerEntry::new(*at, actor.clone(), "direct_post");
                e.device = Some(device_id.to_string());
                e.session = Some(session_token.to_string());
                e.status = Some(if *accepted { "accepted".into() } else { "rejected".into() });
                e.note = Some(detail.clone());
                e
            }
        };
        ledger.push(entry);
    })
}

fn rp_hook(ledger: &Ledger) -> rp_http::RpHook {
    let ledger = ledger.clone();
    Arc::new(move |event| {
        let entry = match event {
            rp_http::RpEvent::SessionOpened { at, token, expires_at, offer_bytes } => {
                let mut e = LedgerEntry::new(*at, "rp", "session_open");
                e.message = Some("session_offer".into());
                e.session = Some(token.to_string());
                e.bytes = Some(*offer_bytes as u64);
                e.note = Some(format!("expires_at {expires_at}"));
                e
            }
            rp_http::RpEvent::VoucherAccepted {
                at,
                token,
                device_id,
                trust,
                total_trust,
                granted_now,
                relayed,
                voucher_bytes,
            } => {
                let mut e = LedgerEntry::new(*at, "rp", "voucher_accepted");
                e.message = Some("trust_voucher".into());
                e.session = Some(token.to_string());
                e.device = Some(device_id.to_string());
                e.trust = Some(u64::from(*trust));
                e.total = Some(*total_trust);
                if *granted_now {
                    e.status = Some("granted".into());
                }
                e.note = Some(if *relayed { "relayed".into() } else { "direct".into() });
                e.bytes = Some(*voucher_bytes as u64);
                e
            }
            rp_http::RpEvent::VoucherRejected {
                at,
                token,
                device_id,
                reason,
                relayed,
                voucher_bytes,
            } => {
                let mut e = LedgerEntry::new(*at, "rp", "voucher_rejected");
                e.message = Some("trust_voucher".into());
                e.session = token.as_ref().map(|t| t.to_string());
                e.device = Some(device_id.to_string());
                e.reason = Some(reason.as_str().into());
                e.note = Some(if *relayed { "relayed".into() } else { "direct".into() });
                e.bytes = Some(*voucher_bytes as u64);
                e
            }
            rp_http::RpEvent::DecisionRendered { at, token, status, total_trust, response_bytes } => {
                let mut e = LedgerEntry::new(*at, "rp", "decision");
                e.message = Some("decision".into());
                e.session = Some(token.to_string());
                e.status = Some(status.as_str().into());
                e.total = Some(*total_trust);
                e.bytes = Some(*response_bytes as u64);
                e
            }
        };
        ledger.push(entry);
    })
}

fn http_post(url: &str, body: &[u8]) -> Result<(u16, Vec<u8>), String> {
    read_response(ureq::post(url).send_bytes(body))
}

fn http_get(url: &str) -> Result<(u16, Vec<u8>), String> {
    read_response(ureq::get(url).call())
}

fn read_response(
    result: Result<ureq::Response, ureq::Error>,
) -> Result<(u16, Vec<u8>), String> {
    let response = match result {
        Ok(r) => r,
        Err(ureq::Error::Status(_, r)) => r,
        Err(e) => return Err(e.to_string()),
    };
    let status = response.status();
    let mut body = Vec::new();
    std::io::Read::read_to_end(&mut response.into_reader(), &mut body).map_err(|e| e.to_string())?;
    Ok((status, body))
}
