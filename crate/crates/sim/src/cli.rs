//! The `trustware` command line: scenario runs and standalone services.
//!
//! ```text
//! trustware sim list
//! trustware sim run --scenario NAME [--seed N] [--delivery-mode M] [--format F] [--out FILE]
//! trustware sim run --config FILE [--set section.key=value ...] [...]
//! trustware manufacturer serve --config FILE
//! trustware manufacturer provision --config FILE
//! trustware rp serve --config FILE
//! ```
//!
//! Exit codes: 0 success, 1 configuration error, 2 scenario assertion
//! failure (or deadlock).

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use trustware_core::{Clock, DeliveryMode, Keypair, ManufacturerName};
use trustware_manufacturer::http as mfr_http;
use trustware_manufacturer::AuthServer;
use trustware_relying_party::http as rp_http;
use trustware_relying_party::{ManufacturerRegistry, RelyingParty};

use crate::builtins;
use crate::config_file::{
    manufacturer_service_from_config, rp_service_from_config, scenario_from_config, RawConfig,
};
use crate::runner::run_scenario;
use crate::scenario::SimError;

const USAGE: &str = "usage:
  trustware sim list
  trustware sim run --scenario NAME | --config FILE
                    [--seed N] [--delivery-mode relayed|direct]
                    [--set section.key=value]... [--format jsonlines|summary]
                    [--out FILE]
  trustware manufacturer serve --config FILE
  trustware manufacturer provision --config FILE
  trustware rp serve --config FILE";

pub fn run(args: &[String]) -> i32 {
    match dispatch(args) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("{msg}");
            eprintln!("{USAGE}");
            1
        }
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Scenario(msg)) => {
            eprintln!("scenario failed: {msg}");
            2
        }
    }
}

enum CliError {
    Usage(String),
    Config(String),
    Scenario(String),
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::ConfigInvalid(_) => CliError::Config(e.to_string()),
            SimError::Deadlock(_) => CliError::Scenario(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn dispatch(args: &[String]) -> Result<i32, CliError> {
    let words: Vec<&str> = args.iter().map(String::as_str).collect();
    match words.as_slice() {
        ["sim", "list", ..] => {
            for name in builtins::names() {
                println!("{name}");
            }
            Ok(0)
        }
        ["sim", "run", rest @ ..] => sim_run(rest),
        ["manufacturer", "serve", rest @ ..] => manufacturer_serve(rest),
        ["manufacturer", "provision", rest @ ..] => manufacturer_provision(rest),
        ["rp", "serve", rest @ ..] => rp_serve(rest),
        [] => Err(CliError::Usage("no command given".into())),
        other => Err(CliError::Usage(format!("unknown command {:?}", other.join(" ")))),
    }
}

#[derive(Default)]
struct Flags {
    scenario: Option<String>,
    config: Option<String>,
    seed: Option<u64>,
    delivery_mode: Option<DeliveryMode>,
    sets: Vec<String>,
    format: Option<String>,
    out: Option<String>,
}

fn parse_flags(rest: &[&str]) -> Result<Flags, CliError> {
    let mut flags = Flags::default();
    let mut iter = rest.iter();
    while let Some(flag) = iter.next() {
        let mut value = |name: &str| {
            iter.next()
                .map(|v| v.to_string())
                .ok_or_else(|| CliError::Usage(format!("{name} needs a value")))
        };
        match *flag {
            "--scenario" => flags.scenario = Some(value("--scenario")?),
            "--config" => flags.config = Some(value("--config")?),
            "--seed" => {
                flags.seed = Some(
                    value("--seed")?
                        .parse()
                        .map_err(|e| CliError::Usage(format!("--seed: {e}")))?,
                )
            }
            "--delivery-mode" => {
                let v = value("--delivery-mode")?;
                flags.delivery_mode = Some(
                    DeliveryMode::parse(&v)
                        .map_err(|_| CliError::Usage(format!("unknown delivery mode {v:?}")))?,
                );
            }
            "--set" => flags.sets.push(value("--set")?),
            "--format" => flags.format = Some(value("--format")?),
            "--out" => flags.out = Some(value("--out")?),
            other => return Err(CliError::Usage(format!("unknown flag {other:?}"))),
        }
    }
    Ok(flags)
}

fn sim_run(rest: &[&str]) -> Result<i32, CliError> {
    let flags = parse_flags(rest)?;
    let mut cfg = match (&flags.scenario, &flags.config) {
        (Some(name), None) => builtins::by_name(name)
            .ok_or_else(|| CliError::Config(format!("no built-in scenario named {name:?}")))?,
        (None, Some(path)) => {
            let mut raw = RawConfig::load(path)?;
            raw.apply_overrides(&flags.sets)?;
            scenario_from_config(&raw)?
        }
        _ => {
            return Err(CliError::Usage(
                "sim run needs exactly one of --scenario or --config".into(),
            ))
        }
    };
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = flags.delivery_mode {
        cfg.delivery_mode = mode;
    }

    let report = run_scenario(&cfg)?;

    let output = match flags.format.as_deref() {
        None | Some("jsonlines") => report.to_jsonlines(),
        Some("summary") => report.to_summary_text().into_bytes(),
        Some(other) => return Err(CliError::Usage(format!("unknown format {other:?}"))),
    };
    match &flags.out {
        Some(path) => std::fs::write(path, &output)
            .map_err(|e| CliError::Config(format!("cannot write {path}: {e}")))?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&output)
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
    }

    if report.passed() {
        Ok(0)
    } else {
        for failure in &report.assertion_failures {
            eprintln!("assertion failed: {failure}");
        }
        Ok(2)
    }
}

fn load_config_flag(rest: &[&str]) -> Result<RawConfig, CliError> {
    let flags = parse_flags(rest)?;
    let path = flags
        .config
        .ok_or_else(|| CliError::Usage("--config FILE is required".into()))?;
    let mut raw = RawConfig::load(&path)?;
    raw.apply_overrides(&flags.sets)?;
    Ok(raw)
}

fn build_manufacturer_service(
    raw: &RawConfig,
) -> Result<(Arc<mfr_http::ManufacturerService>, String), CliError> {
    let cfg = manufacturer_service_from_config(raw)?;
    let name = ManufacturerName::parse(&cfg.name)
        .map_err(|e| CliError::Config(format!("manufacturer name: {e}")))?;
    let keypair = Keypair::from_hex(&cfg.signing_key_hex)
        .map_err(|e| CliError::Config(format!("signing key: {e}")))?;
    let server = match &cfg.journal {
        Some(path) => AuthServer::with_journal(
            name,
            cfg.url.clone(),
            keypair,
            cfg.heuristic,
            cfg.skew_intervals,
            path,
        )
        .map_err(|e| CliError::Config(e.to_string()))?,
        None => AuthServer::new(name, cfg.url.clone(), keypair, cfg.heuristic, cfg.skew_intervals),
    };
    let service = Arc::new(mfr_http::ManufacturerService::new(
        server,
        Box::new(ChaCha20Rng::from_entropy()),
        Clock::Real,
        cfg.delivery_mode,
        cfg.relying_party_url.clone(),
        mfr_http::stderr_hook(&cfg.name),
    ));
    Ok((service, cfg.listen))
}

fn manufacturer_serve(rest: &[&str]) -> Result<i32, CliError> {
    let raw = load_config_flag(rest)?;
    let (service, listen) = build_manufacturer_service(&raw)?;
    let handle = mfr_http::serve(service, &listen).map_err(|e| CliError::Config(e.to_string()))?;
    eprintln!("manufacturer listening on {}", handle.addr());
    // runs until the process is signalled; the journal is flushed per event,
    // so an interrupted server replays to the same state
    loop {
        std::thread::park();
    }
}

fn manufacturer_provision(rest: &[&str]) -> Result<i32, CliError> {
    let raw = load_config_flag(rest)?;
    let (service, _) = build_manufacturer_service(&raw)?;
    let (status, body) = service.handle("POST", "/provision", &[]);
    if status != 200 {
        return Err(CliError::Config(format!(
            "provision failed: {}",
            String::from_utf8_lossy(&body)
        )));
    }
    let value: serde_json::Value =
        serde_json::from_slice(&body).map_err(|e| CliError::Config(e.to_string()))?;
    // roster-compatible line for the new device
    println!(
        "{},{},{},0,honest,local",
        value["device_id"].as_str().unwrap_or_default(),
        value["secret"].as_str().unwrap_or_default(),
        value["manufacturer_url"].as_str().unwrap_or_default(),
    );
    Ok(0)
}

fn rp_serve(rest: &[&str]) -> Result<i32, CliError> {
    let raw = load_config_flag(rest)?;
    let cfg = rp_service_from_config(&raw)?;
    let registry = ManufacturerRegistry::load(&cfg.registry_path)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let state = RelyingParty::new(cfg.url.clone(), cfg.policy.clone(), registry);
    let service = Arc::new(rp_http::RelyingPartyService::new(
        state,
        Box::new(ChaCha20Rng::from_entropy()),
        Clock::Real,
        rp_http::stderr_hook("rp"),
    ));
    let handle =
        rp_http::serve(service, &cfg.listen).map_err(|e| CliError::Config(e.to_string()))?;
    eprintln!("relying party listening on {}", handle.addr());
    loop {
        std::thread::park();
    }
}
