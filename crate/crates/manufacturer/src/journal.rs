//! Append-only journal of registry mutations, one canonically encoded event
//! per line. Replaying the journal at startup reconstructs the registry
//! byte-for-byte; only provision and successful verification mutate state,
//! so those are the only event kinds.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use trustware_core::{DeviceId, DeviceSecret};

use crate::server::ManufacturerError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JournalEvent {
    Provision { at: u64, device_id: DeviceId, secret: DeviceSecret },
    VerifyOk { at: u64, device_id: DeviceId, interval: u64 },
}

impl JournalEvent {
    fn encode(&self) -> String {
        let mut map = Map::new();
        match self {
            Self::Provision { at, device_id, secret } => {
                map.insert("at".into(), Value::from(*at));
                map.insert("device_id".into(), Value::from(device_id.as_str()));
                map.insert("kind".into(), Value::from("provision"));
                map.insert("secret".into(), Value::from(secret.as_str()));
            }
            Self::VerifyOk { at, device_id, interval } => {
                map.insert("at".into(), Value::from(*at));
                map.insert("device_id".into(), Value::from(device_id.as_str()));
                map.insert("interval".into(), Value::from(*interval));
                map.insert("kind".into(), Value::from("verify_ok"));
            }
        }
        serde_json::to_string(&Value::Object(map)).expect("journal encoding is infallible")
    }

    fn decode(line: &str) -> Result<Self, ManufacturerError> {
        let corrupt = |why: String| ManufacturerError::JournalCorrupt(why);
        let value: Value = serde_json::from_str(line)
            .map_err(|e| corrupt(format!("bad journal line: {e}")))?;
        let map = value.as_object().ok_or_else(|| corrupt("journal line not a map".into()))?;
        let get_str = |key: &str| {
            map.get(key)
                .and_then(Value::as_str)
                .ok_or_else(|| corrupt(format!("journal field {key:?} missing")))
        };
        let get_u64 = |key: &str| {
            map.get(key)
                .and_then(Value::as_u64)
                .ok_or_else(|| corrupt(format!("journal field {key:?} missing")))
        };
        match get_str("kind")? {
            "provision" => Ok(Self::Provision {
                at: get_u64("at")?,
                device_id: DeviceId::parse(get_str("device_id")?)
                    .map_err(|e| corrupt(e.to_string()))?,
                secret: DeviceSecret::parse(get_str("secret")?)
                    .map_err(|e| corrupt(e.to_string()))?,
            }),
            "verify_ok" => Ok(Self::VerifyOk {
                at: get_u64("at")?,
                device_id: DeviceId::parse(get_str("device_id")?)
                    .map_err(|e| corrupt(e.to_string()))?,
                interval: get_u64("interval")?,
            }),
            other => Err(corrupt(format!("unknown journal event kind {other:?}"))),
        }
    }
}

#[derive(Debug)]
pub struct Journal {
    path: PathBuf,
    file: File,
}

impl Journal {
    /// Open (or create) a journal for appending.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, ManufacturerError> {
        let path = path.as_ref().to_owned();
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self { path, file })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Append one event and flush it to the OS before returning, so a crash
    /// after `append` never loses the event.
    pub fn append(&mut self, event: &JournalEvent) -> Result<(), ManufacturerError> {
        let mut line = event.encode();
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.flush()?;
        Ok(())
    }

    /// Read back every event in order. Missing file means empty history.
    pub fn replay(path: impl AsRef<Path>) -> Result<Vec<JournalEvent>, ManufacturerError> {
        let file = match File::open(path.as_ref()) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let mut events = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            events.push(JournalEvent::decode(&line)?);
        }
        Ok(events)
    }
}
