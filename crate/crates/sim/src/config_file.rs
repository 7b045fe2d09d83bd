//! Flat structured config files: `[section]` headers over `key = value`
//! lines, `#` comments, every value overridable from the command line with
//! `--set 'section.key=value'`.

use std::collections::BTreeMap;

use trustware_core::{DeliveryMode, DeviceId, DeviceSecret, TrustPolicy};
use trustware_devices::{parse_roster, AdversaryKind, DeviceBehavior};
use trustware_manufacturer::{HeuristicKind, TrustHeuristic};

use crate::scenario::{
    AdversarySpec, AgentSpec, ClockMode, DeviceSpec, ManufacturerSpec, ScenarioConfig, SimError,
    DEFAULT_START_TIME,
};

/// Parsed config text: ordered sections of ordered key-value pairs.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    sections: Vec<(String, BTreeMap<String, String>)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let mut sections: Vec<(String, BTreeMap<String, String>)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(header) = line.strip_prefix('[') {
                let Some(name) = header.strip_suffix(']') else {
                    return Err(SimError::ConfigInvalid(format!(
                        "line {}: unterminated section header",
                        idx + 1
                    )));
                };
                sections.push((name.trim().to_owned(), BTreeMap::new()));
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(SimError::ConfigInvalid(format!(
                    "line {}: expected key = value",
                    idx + 1
                )));
            };
            let Some((_, entries)) = sections.last_mut() else {
                return Err(SimError::ConfigInvalid(format!(
                    "line {}: key outside any [section]",
                    idx + 1
                )));
            };
            entries.insert(key.trim().to_owned(), value.trim().to_owned());
        }
        Ok(Self { sections })
    }

    pub fn load(path: &str) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::ConfigInvalid(format!("cannot read {path}: {e}")))?;
        Self::parse(&text)
    }

    /// Apply `section.key=value` overrides (creating sections as needed).
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<(), SimError> {
        for item in overrides {
            let Some((path, value)) = item.split_once('=') else {
                return Err(SimError::ConfigInvalid(format!(
                    "override {item:?} must look like section.key=value"
                )));
            };
            let Some((section, key)) = path.rsplit_once('.') else {
                return Err(SimError::ConfigInvalid(format!(
                    "override {item:?} must name a section.key"
                )));
            };
            let section = section.trim();
            let entries = match self.sections.iter_mut().find(|(name, _)| name == section) {
                Some((_, entries)) => entries,
                None => {
                    self.sections.push((section.to_owned(), BTreeMap::new()));
                    &mut self.sections.last_mut().expect("just pushed").1
                }
            };
            entries.insert(key.trim().to_owned(), value.trim().to_owned());
        }
        Ok(())
    }

    fn section(&self, name: &str) -> Option<&BTreeMap<String, String>> {
        self.sections.iter().find(|(n, _)| n == name).map(|(_, e)| e)
    }

    fn sections_with_prefix<'a>(
        &'a self,
        prefix: &'a str,
    ) -> impl Iterator<Item = (&'a str, &'a BTreeMap<String, String>)> {
        self.sections.iter().filter_map(move |(name, entries)| {
            name.strip_prefix(prefix)
                .and_then(|rest| rest.strip_prefix(' '))
                .map(|inst| (inst.trim(), entries))
        })
    }
}

fn get_u64(entries: &BTreeMap<String, String>, key: &str, default: u64) -> Result<u64, SimError> {
    match entries.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|e| SimError::ConfigInvalid(format!("{key}: {e}"))),
    }
}

fn get_i64(entries: &BTreeMap<String, String>, key: &str, default: i64) -> Result<i64, SimError> {
    match entries.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|e| SimError::ConfigInvalid(format!("{key}: {e}"))),
    }
}

fn parse_heuristic(entries: &BTreeMap<String, String>) -> Result<TrustHeuristic, SimError> {
    let kind = match entries.get("heuristic").map(String::as_str) {
        None | Some("inverse-use") => HeuristicKind::InverseUse,
        Some(other) => match other.strip_prefix("constant:") {
            Some(v) => HeuristicKind::Constant(
                v.parse()
                    .map_err(|e| SimError::ConfigInvalid(format!("heuristic constant: {e}")))?,
            ),
            None => {
                return Err(SimError::ConfigInvalid(format!("unknown heuristic {other:?}")))
            }
        },
    };
    Ok(TrustHeuristic { kind, rate_limit_s: get_u64(entries, "rate_limit_s", 10)? })
}

/// Interpret a raw config as a scenario.
pub fn scenario_from_config(raw: &RawConfig) -> Result<ScenarioConfig, SimError> {
    let top = raw
        .section("scenario")
        .ok_or_else(|| SimError::ConfigInvalid("missing [scenario] section".into()))?;
    let name = top
        .get("name")
        .cloned()
        .ok_or_else(|| SimError::ConfigInvalid("scenario name is required".into()))?;
    let mut cfg = ScenarioConfig::new(&name);
    cfg.seed = get_u64(top, "seed", 42)?;
    cfg.clock_mode = match top.get("clock").map(String::as_str) {
        None | Some("virtual") => ClockMode::Virtual,
        Some("real") => ClockMode::Real,
        Some(other) => {
            return Err(SimError::ConfigInvalid(format!("unknown clock mode {other:?}")))
        }
    };
    cfg.start_time = get_u64(top, "start_time", DEFAULT_START_TIME)?;
    cfg.duration_s = get_u64(top, "duration_s", 60)?;
    cfg.delivery_mode = match top.get("delivery_mode").map(String::as_str) {
        None | Some("relayed") => DeliveryMode::Relayed,
        Some("direct") => DeliveryMode::Direct,
        Some(other) => {
            return Err(SimError::ConfigInvalid(format!("unknown delivery mode {other:?}")))
        }
    };

    if let Some(policy) = raw.section("policy") {
        cfg.policy = TrustPolicy {
            threshold: get_u64(policy, "threshold", 100)?,
            session_timeout_s: get_u64(policy, "session_timeout_s", 30)?,
            voucher_freshness_s: get_u64(policy, "voucher_freshness_s", 60)?,
            skew_intervals: get_u64(policy, "skew_intervals", 1)? as u32,
        };
    }

    for (name, entries) in raw.sections_with_prefix("manufacturer") {
        cfg.manufacturers.push(ManufacturerSpec {
            name: name.to_owned(),
            heuristic: parse_heuristic(entries)?,
            skew_intervals: get_u64(entries, "skew_intervals", 1)? as u32,
        });
    }

    for (name, entries) in raw.sections_with_prefix("device") {
        let manufacturer = entries
            .get("manufacturer")
            .cloned()
            .ok_or_else(|| SimError::ConfigInvalid(format!("device {name:?} needs a manufacturer")))?;
        let preset = match (entries.get("device_id"), entries.get("secret")) {
            (Some(id), Some(secret)) => Some((
                DeviceId::parse(id).map_err(|e| SimError::ConfigInvalid(e.to_string()))?,
                DeviceSecret::parse(secret).map_err(|e| SimError::ConfigInvalid(e.to_string()))?,
            )),
            (None, None) => None,
            _ => {
                return Err(SimError::ConfigInvalid(format!(
                    "device {name:?}: device_id and secret must be given together"
                )))
            }
        };
        cfg.devices.push(DeviceSpec {
            name: name.to_owned(),
            manufacturer,
            scope: entries.get("scope").cloned().unwrap_or_else(|| "local".into()),
            clock_offset_s: get_i64(entries, "clock_offset_s", 0)?,
            behavior: match entries.get("behavior").map(String::as_str) {
                None => DeviceBehavior::Honest,
                Some(b) => DeviceBehavior::parse(b)
                    .ok_or_else(|| SimError::ConfigInvalid(format!("unknown behavior {b:?}")))?,
            },
            advertise_every_s: get_u64(entries, "advertise_every_s", 5)?,
            first_advertise_at: get_u64(entries, "first_advertise_at_s", 0)?,
            preset,
        });
    }

    // roster files merge in preset devices; manufacturers are matched by
    // their logical verification URL
    if let Some(roster) = raw.section("roster") {
        let path = roster
            .get("file")
            .ok_or_else(|| SimError::ConfigInvalid("[roster] needs file = path".into()))?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::ConfigInvalid(format!("cannot read roster {path}: {e}")))?;
        let entries =
            parse_roster(&text).map_err(|e| SimError::ConfigInvalid(e.to_string()))?;
        for (idx, entry) in entries.into_iter().enumerate() {
            let manufacturer = cfg
                .manufacturers
                .iter()
                .find(|m| {
                    entry.device.manufacturer_url
                        == format!("http://{}.trustware.test/verify", m.name)
                })
                .map(|m| m.name.clone())
                .ok_or_else(|| {
                    SimError::ConfigInvalid(format!(
                        "roster device {} names no configured manufacturer ({})",
                        entry.device.device_id, entry.device.manufacturer_url
                    ))
                })?;
            cfg.devices.push(DeviceSpec {
                name: format!("roster{idx}"),
                manufacturer,
                scope: entry.scope,
                clock_offset_s: entry.device.clock_offset_s,
                behavior: entry.device.behavior,
                advertise_every_s: 5,
                first_advertise_at: 0,
                preset: Some((entry.device.device_id, entry.device.secret)),
            });
        }
    }

    for (name, entries) in raw.sections_with_prefix("agent") {
        cfg.agents.push(AgentSpec {
            name: name.to_owned(),
            scope: entries.get("scope").cloned().unwrap_or_else(|| "local".into()),
            open_at: get_u64(entries, "open_at_s", 0)?,
        });
    }

    for (name, entries) in raw.sections_with_prefix("adversary") {
        let kind = entries
            .get("kind")
            .and_then(|k| AdversaryKind::parse(k))
            .ok_or_else(|| {
                SimError::ConfigInvalid(format!(
                    "adversary {name:?} needs kind = replayer|miner|eater"
                ))
            })?;
        let mut spec = AdversarySpec::new(name, entries.get("scope").map_or("local", |s| s), kind);
        if let Some(at) = entries.get("opens_session_at_s") {
            spec.opens_session_at = Some(
                at.parse()
                    .map_err(|e| SimError::ConfigInvalid(format!("opens_session_at_s: {e}")))?,
            );
        }
        match (entries.get("harvest_from_s"), entries.get("harvest_until_s")) {
            (None, None) => {}
            (from, until) => {
                let from = from.map_or(Ok(0), |v| v.parse()).map_err(|e| {
                    SimError::ConfigInvalid(format!("harvest_from_s: {e}"))
                })?;
                let until = until
                    .map_or(Ok(u64::MAX), |v| v.parse())
                    .map_err(|e| SimError::ConfigInvalid(format!("harvest_until_s: {e}")))?;
                spec.harvest_window = Some((from, until));
            }
        }
        if let Some(list) = entries.get("replay_at_s") {
            for item in list.split(',') {
                spec.replay_at.push(
                    item.trim()
                        .parse()
                        .map_err(|e| SimError::ConfigInvalid(format!("replay_at_s: {e}")))?,
                );
            }
        }
        if let Some(at) = entries.get("deliver_at_s") {
            spec.deliver_at = Some(
                at.parse()
                    .map_err(|e| SimError::ConfigInvalid(format!("deliver_at_s: {e}")))?,
            );
        }
        spec.request_rate_s = get_u64(entries, "request_rate_s", 10)?;
        if let Some(list) = entries.get("cross_deliver_to") {
            spec.cross_targets =
                list.split(',').map(|s| s.trim().to_owned()).filter(|s| !s.is_empty()).collect();
        }
        cfg.adversaries.push(spec);
    }

    cfg.validate()?;
    Ok(cfg)
}

/// Standalone manufacturer service settings.
#[derive(Debug, Clone)]
pub struct ManufacturerServeConfig {
    pub name: String,
    pub listen: String,
    pub url: String,
    pub signing_key_hex: String,
    pub journal: Option<String>,
    pub heuristic: TrustHeuristic,
    pub skew_intervals: u32,
    pub delivery_mode: DeliveryMode,
    pub relying_party_url: Option<String>,
}

pub fn manufacturer_service_from_config(raw: &RawConfig) -> Result<ManufacturerServeConfig, SimError> {
    let entries = raw
        .section("manufacturer")
        .ok_or_else(|| SimError::ConfigInvalid("missing [manufacturer] section".into()))?;
    let listen = entries.get("listen").cloned().unwrap_or_else(|| "127.0.0.1:7100".into());
    let delivery_mode = match entries.get("delivery_mode").map(String::as_str) {
        None | Some("relayed") => DeliveryMode::Relayed,
        Some("direct") => DeliveryMode::Direct,
        Some(other) => {
            return Err(SimError::ConfigInvalid(format!("unknown delivery mode {other:?}")))
        }
    };
    let relying_party_url = entries.get("relying_party_url").cloned();
    if delivery_mode == DeliveryMode::Direct && relying_party_url.is_none() {
        return Err(SimError::ConfigInvalid(
            "direct delivery needs relying_party_url".into(),
        ));
    }
    Ok(ManufacturerServeConfig {
        name: entries
            .get("name")
            .cloned()
            .ok_or_else(|| SimError::ConfigInvalid("manufacturer name is required".into()))?,
        url: entries.get("url").cloned().unwrap_or_else(|| format!("http://{listen}/verify")),
        listen,
        signing_key_hex: entries
            .get("signing_key_hex")
            .cloned()
            .ok_or_else(|| SimError::ConfigInvalid("signing_key_hex is required".into()))?,
        journal: entries.get("journal").cloned(),
        heuristic: parse_heuristic(entries)?,
        skew_intervals: get_u64(entries, "skew_intervals", 1)? as u32,
        delivery_mode,
        relying_party_url,
    })
}

/// Standalone relying-party service settings.
#[derive(Debug, Clone)]
pub struct RpServeConfig {
    pub listen: String,
    pub url: String,
    pub registry_path: String,
    pub policy: TrustPolicy,
}

pub fn rp_service_from_config(raw: &RawConfig) -> Result<RpServeConfig, SimError> {
    let entries = raw
        .section("relying-party")
        .ok_or_else(|| SimError::ConfigInvalid("missing [relying-party] section".into()))?;
    let listen = entries.get("listen").cloned().unwrap_or_else(|| "127.0.0.1:7200".into());
    Ok(RpServeConfig {
        url: entries.get("url").cloned().unwrap_or_else(|| format!("http://{listen}")),
        listen,
        registry_path: entries
            .get("registry")
            .cloned()
            .ok_or_else(|| SimError::ConfigInvalid("registry path is required".into()))?,
        policy: TrustPolicy {
            threshold: get_u64(entries, "threshold", 100)?,
            session_timeout_s: get_u64(entries, "session_timeout_s", 30)?,
            voucher_freshness_s: get_u64(entries, "voucher_freshness_s", 60)?,
            skew_intervals: get_u64(entries, "skew_intervals", 1)? as u32,
        },
    })
}
