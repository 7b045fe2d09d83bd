//! HTTP surface of the authentication server.
//!
//! `POST /verify` takes a `verification_request` and answers 200 with a
//! `trust_voucher` or 403 with a `verification_rejection`. In direct-delivery
//! deployments the server also posts each issued voucher straight to the
//! relying party. `POST /provision` is the operator endpoint for registering
//! a new device; it answers with the device tuple.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use rand::RngCore;
use serde_json::{Map, Value};

use trustware_core::wire::{decode_message, encode_message, WireKind, WireMessage};
use trustware_core::{
    Clock, DeliveryMode, DeviceId, RejectionReason, SessionToken, VerificationRejection,
};

use crate::server::{AuthServer, ManufacturerError, VerifyOutcome};

/// Observer events emitted by the service, one per externally visible step.
/// The scenario harness turns these into ledger lines; the standalone server
/// logs them.
#[derive(Debug, Clone)]
pub enum MfrEvent {
    Provisioned { at: u64, device_id: DeviceId, response_bytes: usize },
    Issued {
        at: u64,
        device_id: DeviceId,
        session_token: SessionToken,
        trust: u8,
        request_bytes: usize,
        response_bytes: usize,
    },
    Rejected {
        at: u64,
        device_id: DeviceId,
        reason: RejectionReason,
        request_bytes: usize,
        response_bytes: usize,
    },
    DirectPosted {
        at: u64,
        device_id: DeviceId,
        session_token: SessionToken,
        accepted: bool,
        detail: String,
    },
}

pub type MfrHook = Arc<dyn Fn(&MfrEvent) + Send + Sync>;

pub fn stderr_hook(prefix: &str) -> MfrHook {
    let prefix = prefix.to_owned();
    Arc::new(move |event| eprintln!("[{prefix}] {event:?}"))
}

pub fn silent_hook() -> MfrHook {
    Arc::new(|_| {})
}

/// Everything one running manufacturer service needs, shareable across the
/// accept loop and tests.
pub struct ManufacturerService {
    state: Arc<Mutex<AuthServer>>,
    provision_rng: Mutex<Box<dyn RngCore + Send>>,
    clock: Clock,
    delivery: DeliveryMode,
    /// Relying-party base URL; required for direct delivery.
    rp_url: Option<String>,
    hook: MfrHook,
}

impl ManufacturerService {
    pub fn new(
        server: AuthServer,
        provision_rng: Box<dyn RngCore + Send>,
        clock: Clock,
        delivery: DeliveryMode,
        rp_url: Option<String>,
        hook: MfrHook,
    ) -> Self {
        Self {
            state: Arc::new(Mutex::new(server)),
            provision_rng: Mutex::new(provision_rng),
            clock,
            delivery,
            rp_url,
            hook,
        }
    }

    pub fn state(&self) -> &Arc<Mutex<AuthServer>> {
        &self.state
    }

    /// Route one request. Returns status code and response body.
    pub fn handle(&self, method: &str, path: &str, body: &[u8]) -> (u16, Vec<u8>) {
        match (method, path) {
            ("POST", "/verify") => self.handle_verify(body),
            ("POST", "/provision") => self.handle_provision(),
            _ => (404, b"not found".to_vec()),
        }
    }

    fn handle_verify(&self, body: &[u8]) -> (u16, Vec<u8>) {
        let now = self.clock.now_unix();
        let request = match decode_message(body, WireKind::VerificationRequest) {
            Ok(WireMessage::VerificationRequest(r)) => r,
            Ok(_) => unreachable!("decode_message returns the requested kind"),
            Err(_) => {
                // can't even name the device: reject with the placeholder id
                let rejection = VerificationRejection {
                    device_id: DeviceId::unknown(),
                    reason: RejectionReason::MalformedRequest,
                };
                let bytes = encode_message(&WireMessage::VerificationRejection(rejection.clone()))
                    .expect("rejection fits the budget");
                (self.hook)(&MfrEvent::Rejected {
                    at: now,
                    device_id: rejection.device_id,
                    reason: rejection.reason,
                    request_bytes: body.len(),
                    response_bytes: bytes.len(),
                });
                return (403, bytes);
            }
        };

        let outcome = {
            let mut state = self.state.lock().expect("auth server lock");
            state.handle_verification(&request, now)
        };
        match outcome {
            Ok(VerifyOutcome::Issued(voucher)) => {
                let bytes = encode_message(&WireMessage::TrustVoucher(voucher.clone()))
                    .expect("voucher fits the budget");
                (self.hook)(&MfrEvent::Issued {
                    at: now,
                    device_id: voucher.device_id.clone(),
                    session_token: voucher.session_token.clone(),
                    trust: voucher.trust,
                    request_bytes: body.len(),
                    response_bytes: bytes.len(),
                });
                if self.delivery == DeliveryMode::Direct {
                    self.post_direct(now, &voucher.device_id, &voucher.session_token, &bytes);
                }
                (200, bytes)
            }
            Ok(VerifyOutcome::Rejected(rejection)) => {
                let bytes = encode_message(&WireMessage::VerificationRejection(rejection.clone()))
                    .expect("rejection fits the budget");
                (self.hook)(&MfrEvent::Rejected {
                    at: now,
                    device_id: rejection.device_id,
                    reason: rejection.reason,
                    request_bytes: body.len(),
                    response_bytes: bytes.len(),
                });
                (403, bytes)
            }
            Err(e) => (500, e.to_string().into_bytes()),
        }
    }

    /// Direct delivery (the in-paper implementation variant): push the
    /// voucher to the relying party ourselves. The verify response still
    /// carries the voucher, so the client sees the same bytes either way.
    fn post_direct(&self, now: u64, device_id: &DeviceId, token: &SessionToken, voucher_bytes: &[u8]) {
        let Some(rp_url) = &self.rp_url else {
            (self.hook)(&MfrEvent::DirectPosted {
                at: now,
                device_id: device_id.clone(),
                session_token: token.clone(),
                accepted: false,
                detail: "no relying-party url configured".into(),
            });
            return;
        };
        let url = format!("{}/voucher", rp_url.trim_end_matches('/'));
        let result = ureq::post(&url).send_bytes(voucher_bytes);
        let (accepted, detail) = match result {
            Ok(resp) => (resp.status() == 200, format!("status {}", resp.status())),
            Err(ureq::Error::Status(code, resp)) => {
                let body = resp.into_string().unwrap_or_default();
                (false, format!("status {code}: {body}"))
            }
            Err(e) => (false, format!("transport: {e}")),
        };
        (self.hook)(&MfrEvent::DirectPosted {
            at: now,
            device_id: device_id.clone(),
            session_token: token.clone(),
            accepted,
            detail,
        });
    }

    fn handle_provision(&self) -> (u16, Vec<u8>) {
        let now = self.clock.now_unix();
        let record = {
            let mut rng = self.provision_rng.lock().expect("rng lock");
            let mut state = self.state.lock().expect("auth server lock");
            match state.provision_device(rng.as_mut(), now) {
                Ok(r) => r,
                Err(e) => return (500, e.to_string().into_bytes()),
            }
        };
        let url = self.state.lock().expect("auth server lock").url().to_owned();
        let mut map = Map::new();
        map.insert("device_id".into(), Value::from(record.device_id.as_str()));
        map.insert("kind".into(), Value::from("provisioned_device"));
        map.insert("manufacturer_url".into(), Value::from(url));
        map.insert("secret".into(), Value::from(record.secret.as_str()));
        let bytes = serde_json::to_vec(&Value::Object(map)).expect("provision response");
        (self.hook)(&MfrEvent::Provisioned {
            at: now,
            device_id: record.device_id,
            response_bytes: bytes.len(),
        });
        (200, bytes)
    }
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

/// Serve a manufacturer service on `listen_addr` (use port 0 for ephemeral).
pub fn serve(
    service: Arc<ManufacturerService>,
    listen_addr: &str,
) -> Result<ServiceHandle, ManufacturerError> {
    let server = tiny_http::Server::http(listen_addr)
        .map_err(|e| ManufacturerError::Storage(std::io::Error::other(e.to_string())))?;
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
            let path = request.url().split('?').next().unwrap_or("/").to_owned();
            let (status, response_body) = service.handle(&method, &path, &body);
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
