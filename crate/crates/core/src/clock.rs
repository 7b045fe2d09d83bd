use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

/// Unix-seconds time source handed to every service. Nothing below the
/// harness reads wall time directly, so whole protocol runs — TOTP windows,
/// rate limits, session timeouts — execute identically under a virtual clock.
#[derive(Debug, Clone)]
pub enum Clock {
    Real,
    Virtual(Arc<AtomicU64>),
}

impl Clock {
    /// A virtual clock frozen at `start` until explicitly advanced.
    pub fn virtual_at(start: u64) -> Self {
        Self::Virtual(Arc::new(AtomicU64::new(start)))
    }

    pub fn now_unix(&self) -> u64 {
        match self {
            Self::Real => SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .expect("system clock before Unix epoch")
                .as_secs(),
            Self::Virtual(t) => t.load(Ordering::SeqCst),
        }
    }

    /// Move a virtual clock. Panics on a real clock.
    pub fn set(&self, now: u64) {
        match self {
            Self::Real => panic!("cannot set the real clock"),
            Self::Virtual(t) => t.store(now, Ordering::SeqCst),
        }
    }
}
