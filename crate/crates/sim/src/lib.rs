//! Scenario harness for the Trustware protocol: hosts the manufacturer and
//! relying-party services over loopback HTTP, emulates devices, agents, and
//! adversaries on a scoped advertisement bus, and drives everything from a
//! deterministic virtual clock.
//!
//! A [`ScenarioConfig`] describes one run: the cast (manufacturers, devices,
//! agents, adversaries), the relying party's policy, the delivery topology,
//! and a schedule. [`run_scenario`] executes it and returns a
//! [`ScenarioReport`]: a totally ordered ledger of every protocol event, the
//! outcome of every session, and the run's message-size maxima. Under a
//! fixed seed two runs produce byte-identical reports.
//!
//! The built-in scenarios in [`builtins`] cover the honest path and the
//! protocol's documented attack surface: replay, trust-mining, trust-eating,
//! clock skew, shared devices, remote access, and voucher expiry.

pub mod builtins;
mod config_file;
mod ledger;
mod report;
mod runner;
mod scenario;

pub mod cli;

pub use config_file::{
    manufacturer_service_from_config, rp_service_from_config, scenario_from_config,
    ManufacturerServeConfig, RawConfig, RpServeConfig,
};
pub use ledger::{Ledger, LedgerEntry};
pub use report::{RunMeta, ScenarioReport, SessionOutcome};
pub use runner::run_scenario;
pub use scenario::{
    AdversarySpec, AgentSpec, Assertion, ClockMode, DeviceSpec, ManufacturerSpec, ScenarioConfig,
    SimError,
};
