use thiserror::Error;

use trustware_core::{DeviceId, DeviceSecret};

use crate::device::{DeviceBehavior, EmulatedDevice};

#[derive(Debug, Error)]
pub enum RosterError {
    #[error("roster line {line}: {why}")]
    Malformed { line: usize, why: String },
}

/// One roster row: a device plus the scope it broadcasts in.
#[derive(Debug, Clone)]
pub struct RosterEntry {
    pub device: EmulatedDevice,
    pub scope: String,
}

/// Parse the device roster format: one device per line,
/// `device_id,secret,manufacturer_url,clock_offset_s,behavior,scope`.
pub fn parse_roster(text: &str) -> Result<Vec<RosterEntry>, RosterError> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 6 {
            return Err(RosterError::Malformed {
                line,
                why: format!("expected 6 comma-separated fields, got {}", fields.len()),
            });
        }
        let malformed = |why: String| RosterError::Malformed { line, why };
        let device_id = DeviceId::parse(fields[0]).map_err(|e| malformed(e.to_string()))?;
        let secret = DeviceSecret::parse(fields[1]).map_err(|e| malformed(e.to_string()))?;
        let manufacturer_url = fields[2].to_owned();
        if manufacturer_url.is_empty() {
            return Err(malformed("manufacturer url must be non-empty".into()));
        }
        let clock_offset_s: i64 =
            fields[3].parse().map_err(|e| malformed(format!("bad clock offset: {e}")))?;
        let behavior = DeviceBehavior::parse(fields[4])
            .ok_or_else(|| malformed(format!("unknown behavior {:?}", fields[4])))?;
        let scope = fields[5].to_owned();
        if scope.is_empty() {
            return Err(malformed("scope must be non-empty".into()));
        }
        entries.push(RosterEntry {
            device: EmulatedDevice { device_id, secret, manufacturer_url, clock_offset_s, behavior },
            scope,
        });
    }
    Ok(entries)
}

/// Render entries in the roster file format.
pub fn format_roster(entries: &[RosterEntry]) -> String {
    let mut out = String::new();
    for entry in entries {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            entry.device.device_id,
            entry.device.secret.as_str(),
            entry.device.manufacturer_url,
            entry.device.clock_offset_s,
            entry.device.behavior.as_str(),
            entry.scope,
        ));
    }
    out
}
