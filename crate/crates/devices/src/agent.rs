use std::collections::BTreeSet;

use trustware_core::wire::{decode_message, WireKind, WireMessage};
use trustware_core::{DeliveryMode, DeviceId, SessionOffer, VerificationRequest};

/// The client-side coordinator that a Trustware browser would embed: it
/// holds the session offer, listens for advertisements in its scope, and
/// turns each distinct device heard into exactly one verification request.
///
/// Pure state machine: the harness performs the actual HTTP exchanges.
#[derive(Debug)]
pub struct ClientAgent {
    pub name: String,
    pub scope: String,
    delivery: DeliveryMode,
    session: Option<SessionOffer>,
    requested: BTreeSet<DeviceId>,
}

/// The agent's reaction to one overheard broadcast.
#[derive(Debug, Clone, PartialEq)]
pub enum AgentHear {
    /// Chase it: send this request to the device's manufacturer.
    Request { manufacturer_url: String, request: VerificationRequest },
    /// Same device already chased this session; one request per device keeps
    /// the agent from tripping the manufacturer rate limit against itself.
    AlreadyRequested,
    /// Undecodable broadcast, dropped.
    Malformed,
    /// No session in progress; nothing to verify for.
    NoSession,
}

impl ClientAgent {
    pub fn new(name: impl Into<String>, scope: impl Into<String>, delivery: DeliveryMode) -> Self {
        Self {
            name: name.into(),
            scope: scope.into(),
            delivery,
            session: None,
            requested: BTreeSet::new(),
        }
    }

    /// Begin verifying for a fresh session; forgets previous dedup state.
    pub fn adopt_session(&mut self, offer: SessionOffer) {
        self.session = Some(offer);
        self.requested.clear();
    }

    pub fn session(&self) -> Option<&SessionOffer> {
        self.session.as_ref()
    }

    /// In relayed mode the agent forwards received vouchers to the relying
    /// party itself; in direct mode the manufacturer already did.
    pub fn relays_vouchers(&self) -> bool {
        self.delivery == DeliveryMode::Relayed
    }

    /// React to raw advertisement bytes heard on the bus.
    pub fn hear(&mut self, advertisement_bytes: &[u8]) -> AgentHear {
        let Some(offer) = &self.session else {
            return AgentHear::NoSession;
        };
        let advertisement = match decode_message(advertisement_bytes, WireKind::Advertisement) {
            Ok(WireMessage::Advertisement(a)) => a,
            _ => return AgentHear::Malformed,
        };
        if self.requested.contains(&advertisement.device_id) {
            return AgentHear::AlreadyRequested;
        }
        self.requested.insert(advertisement.device_id.clone());
        AgentHear::Request {
            manufacturer_url: advertisement.manufacturer_url.clone(),
            request: VerificationRequest {
                device_id: advertisement.device_id,
                totp_code: advertisement.totp_code,
                session_token: offer.session_token.clone(),
            },
        }
    }
}
