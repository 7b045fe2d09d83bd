use std::sync::{Arc, Mutex};

use serde::Serialize;

/// One totally ordered ledger line. Optional fields appear only when they
/// mean something for the entry kind, keeping the jsonlines output compact
/// and byte-stable.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct LedgerEntry {
    pub seq: u64,
    pub t: u64,
    pub run: String,
    pub actor: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bytes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub device: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub session: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trust: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl LedgerEntry {
    /// A bare entry; callers fill in the fields that apply.
    pub fn new(t: u64, actor: impl Into<String>, kind: impl Into<String>) -> Self {
        Self {
            seq: 0,
            t,
            run: String::new(),
            actor: actor.into(),
            kind: kind.into(),
            message: None,
            bytes: None,
            device: None,
            session: None,
            trust: None,
            total: None,
            status: None,
            reason: None,
            note: None,
        }
    }
}

/// Append-only, shareable event ledger. Sequence numbers are assigned under
/// the lock, and every append happens inside the scheduler's synchronous
/// call chain, so the order is the same on every run of the same seed.
#[derive(Clone)]
pub struct Ledger {
    run: String,
    entries: Arc<Mutex<Vec<LedgerEntry>>>,
}

impl Ledger {
    pub fn new(run: impl Into<String>) -> Self {
        Self { run: run.into(), entries: Arc::new(Mutex::new(Vec::new())) }
    }

    pub fn push(&self, mut entry: LedgerEntry) {
        let mut entries = self.entries.lock().expect("ledger lock");
        entry.seq = entries.len() as u64;
        entry.run = self.run.clone();
        entries.push(entry);
    }

    pub fn snapshot(&self) -> Vec<LedgerEntry> {
        self.entries.lock().expect("ledger lock").clone()
    }
}
