//! HTTP surface of the relying party.
//!
//! `POST /session` opens a session and answers with a `session_offer`.
//! `POST /voucher` ingests a `trust_voucher`; a relay names its own session
//! with `?token=...`, a direct delivery omits it and the voucher's embedded
//! token routes. Accepted vouchers answer 200 with the session's current
//! `decision`; refusals answer 403 with a `verification_rejection`.
//! `GET /decision?token=...` reports the verdict.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use rand::RngCore;

use trustware_core::wire::{decode_message, encode_message, WireKind, WireMessage};
use trustware_core::{
    Clock, Decision, DeviceId, RejectionReason, SessionStatus, SessionToken,
    VerificationRejection,
};

use crate::state::RelyingParty;

/// Observer events, one per externally visible step.
#[derive(Debug, Clone)]
pub enum RpEvent {
    SessionOpened { at: u64, token: SessionToken, expires_at: u64, offer_bytes: usize },
    VoucherAccepted {
        at: u64,
        token: SessionToken,
        device_id: DeviceId,
        trust: u8,
        total_trust: u64,
        granted_now: bool,
        relayed: bool,
        voucher_bytes: usize,
    },
    VoucherRejected {
        at: u64,
        token: Option<SessionToken>,
        device_id: DeviceId,
        reason: RejectionReason,
        relayed: bool,
        voucher_bytes: usize,
    },
    DecisionRendered {
        at: u64,
        token: SessionToken,
        status: SessionStatus,
        total_trust: u64,
        response_bytes: usize,
    },
}

pub type RpHook = Arc<dyn Fn(&RpEvent) + Send + Sync>;

pub fn stderr_hook(prefix: &str) -> RpHook {
    let prefix = prefix.to_owned();
    Arc::new(move |event| eprintln!("[{prefix}] {event:?}"))
}

pub fn silent_hook() -> RpHook {
    Arc::new(|_| {})
}

pub struct RelyingPartyService {
    state: Arc<Mutex<RelyingParty>>,
    token_rng: Mutex<Box<dyn RngCore + Send>>,
    clock: Clock,
    hook: RpHook,
}

impl RelyingPartyService {
    pub fn new(
        state: RelyingParty,
        token_rng: Box<dyn RngCore + Send>,
        clock: Clock,
        hook: RpHook,
    ) -> Self {
        Self {
            state: Arc::new(Mutex::new(state)),
            token_rng: Mutex::new(token_rng),
            clock,
            hook,
        }
    }

    pub fn state(&self) -> &Arc<Mutex<RelyingParty>> {
        &self.state
    }

    /// Route one request. Returns status code and response body.
    pub fn handle(&self, method: &str, path: &str, query: &str, body: &[u8]) -> (u16, Vec<u8>) {
        match (method, path) {
            ("POST", "/session") => self.handle_open_session(),
            ("POST", "/voucher") => self.handle_voucher(query, body),
            ("GET", "/decision") => self.handle_decision(query),
            _ => (404, b"not found".to_vec()),
        }
    }

    fn handle_open_session(&self) -> (u16, Vec<u8>) {
        let now = self.clock.now_unix();
        let offer = {
            let mut rng = self.token_rng.lock().expect("rng lock");
            let mut state = self.state.lock().expect("rp lock");
            state.open_session(rng.as_mut(), now)
        };
        let bytes = encode_message(&WireMessage::SessionOffer(offer.clone()))
            .expect("offer fits the budget");
        (self.hook)(&RpEvent::SessionOpened {
            at: now,
            token: offer.session_token,
            expires_at: offer.expires_at,
            offer_bytes: bytes.len(),
        });
        (200, bytes)
    }

    fn handle_voucher(&self, query: &str, body: &[u8]) -> (u16, Vec<u8>) {
        let now = self.clock.now_unix();
        let target = match query_token(query) {
            Ok(t) => t,
            Err(reason) => return self.reject(now, None, DeviceId::unknown(), reason, query, body),
        };
        let voucher = match decode_message(body, WireKind::TrustVoucher) {
            Ok(WireMessage::TrustVoucher(v)) => v,
            Ok(_) => unreachable!("decode_message returns the requested kind"),
            Err(_) => {
                return self.reject(
                    now,
                    target.as_ref(),
                    DeviceId::unknown(),
                    RejectionReason::MalformedRequest,
                    query,
                    body,
                )
            }
        };

        let outcome = {
            let mut state = self.state.lock().expect("rp lock");
            state.accept_voucher(target.as_ref(), &voucher, now)
        };
        match outcome {
            Ok(accepted) => {
                let token = target.clone().unwrap_or_else(|| voucher.session_token.clone());
                (self.hook)(&RpEvent::VoucherAccepted {
                    at: now,
                    token: token.clone(),
                    device_id: voucher.device_id.clone(),
                    trust: voucher.trust,
                    total_trust: accepted.total_trust,
                    granted_now: accepted.granted_now,
                    relayed: target.is_some(),
                    voucher_bytes: body.len(),
                });
                let decision = Decision {
                    session_token: token,
                    status: accepted.status,
                    total_trust: accepted.total_trust,
                };
                let bytes = encode_message(&WireMessage::Decision(decision))
                    .expect("decision fits the budget");
                (200, bytes)
            }
            Err(rejection) => self.reject(
                now,
                target.as_ref(),
                rejection.device_id,
                rejection.reason,
                query,
                body,
            ),
        }
    }

    fn reject(
        &self,
        at: u64,
        target: Option<&SessionToken>,
        device_id: DeviceId,
        reason: RejectionReason,
        _query: &str,
        body: &[u8],
    ) -> (u16, Vec<u8>) {
        let rejection = VerificationRejection { device_id: device_id.clone(), reason };
        let bytes = encode_message(&WireMessage::VerificationRejection(rejection))
            .expect("rejection fits the budget");
        (self.hook)(&RpEvent::VoucherRejected {
            at,
            token: target.cloned(),
            device_id,
            reason,
            relayed: target.is_some(),
            voucher_bytes: body.len(),
        });
        (403, bytes)
    }

    fn handle_decision(&self, query: &str) -> (u16, Vec<u8>) {
        let now = self.clock.now_unix();
        let token = match query_token(query) {
            Ok(Some(t)) => t,
            _ => return (404, b"missing or bad token".to_vec()),
        };
        let decision = {
            let mut state = self.state.lock().expect("rp lock");
            state.session_decision(&token, now)
        };
        match decision {
            Ok(decision) => {
                let bytes = encode_message(&WireMessage::Decision(decision.clone()))
                    .expect("decision fits the budget");
                (self.hook)(&RpEvent::DecisionRendered {
                    at: now,
                    token,
                    status: decision.status,
                    total_trust: decision.total_trust,
                    response_bytes: bytes.len(),
                });
                (200, bytes)
            }
            Err(_) => {
                let rejection = VerificationRejection {
                    device_id: DeviceId::unknown(),
                    reason: RejectionReason::UnknownSession,
                };
                let bytes = encode_message(&WireMessage::VerificationRejection(rejection))
                    .expect("rejection fits the budget");
                (404, bytes)
            }
        }
    }
}

fn query_token(query: &str) -> Result<Option<SessionToken>, RejectionReason> {
    for pair in query.split('&') {
        if let Some(value) = pair.strip_prefix("token=") {
            return SessionToken::parse(value)
                .map(Some)
                .map_err(|_| RejectionReason::MalformedRequest);
        }
    }
    Ok(None)
}

/// A bound, running HTTP service. Drop or `stop()` to shut down.
pub struct ServiceHandle {
    addr: SocketAddr,
    server: Arc<tiny_http::Server>,
    thread: Option<JoinHandle<()>>,
}

impl ServiceHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        self.server.unblock();
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}

impl Drop for ServiceHandle {
    fn drop(&mut self) {
        self.shutdown();
    }
}

/// Serve a relying party on `listen_addr` (use port 0 for ephemeral).
pub fn serve(
    service: Arc<RelyingPartyService>,
    listen_addr: &str,
) -> Result<ServiceHandle, std::io::Error> {
    let server = tiny_http::Server::http(listen_addr)
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    let server = Arc::new(server);
    let addr = match server.server_addr() {
        tiny_http::ListenAddr::IP(a) => a,
        _ => unreachable!("http listener is always an ip socket"),
    };
    let loop_server = Arc::clone(&server);
    let thread = std::thread::spawn(move || {
        for mut request in loop_server.incoming_requests() {
            let mut body = Vec::new();
            let _ = std::io::Read::read_to_end(request.as_reader(), &mut body);
            let method = request.method().as_str().to_owned();
            let url = request.url().to_owned();
            let (path, query) = match url.split_once('?') {
                Some((p, q)) => (p.to_owned(), q.to_owned()),
                None => (url, String::new()),
            };
            let (status, response_body) = service.handle(&method, &path, &query, &body);
            let response = tiny_http::Response::from_data(response_body)
                .with_status_code(status)
                .with_header(
                    tiny_http::Header::from_bytes(&b"Content-Type"[..], &b"application/json"[..])
                        .expect("static header"),
                );
            let _ = request.respond(response);
        }
    });
    Ok(ServiceHandle { addr, server, thread: Some(thread) })
}
