//! The emulation substrate that stands in for the physical pieces of a
//! Trustware deployment: devices that would broadcast over Bluetooth LE, the
//! browser-side agent that harvests advertisements, and the adversaries the
//! protocol's attack surface invites.
//!
//! Radio proximity is modeled as named scopes on an in-memory
//! [`AdvertisementBus`]: a listener hears exactly the devices sharing its
//! scope. Devices, agents, and adversaries are deterministic state machines;
//! the scenario harness owns all I/O and drives them, so every attack
//! outcome is a reproducible assertion rather than a statistic.
//!
//! Adversaries never hold device secrets — only what they overhear.

mod adversary;
mod agent;
mod bus;
mod device;
mod hosts;
mod roster;

pub use adversary::{Adversary, AdversaryAction, AdversaryKind, AdversaryScript};
pub use agent::{AgentHear, ClientAgent};
pub use bus::AdvertisementBus;
pub use device::{DeviceBehavior, EmulatedDevice};
pub use hosts::Hosts;
pub use roster::{format_roster, parse_roster, RosterEntry, RosterError};
