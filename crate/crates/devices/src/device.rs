use trustware_core::{Advertisement, DeviceId, DeviceSecret};
use trustware_otp::{interval_index, totp};

/// How an emulated device behaves on the bus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviceBehavior {
    /// Broadcasts a fresh advertisement from its own secret each cadence.
    Honest,
    /// Present but mute (powered off, out of battery, Trustware disabled).
    Silent,
}

impl DeviceBehavior {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Honest => "honest",
            Self::Silent => "silent",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "honest" => Some(Self::Honest),
            "silent" => Some(Self::Silent),
            _ => None,
        }
    }
}

/// A device as manufactured: hard-coded id, secret, and home server URL,
/// plus emulation knobs (clock error and behavior).
#[derive(Debug, Clone)]
pub struct EmulatedDevice {
    pub device_id: DeviceId,
    pub secret: DeviceSecret,
    pub manufacturer_url: String,
    /// The device's clock error relative to true time, in seconds.
    pub clock_offset_s: i64,
    pub behavior: DeviceBehavior,
}

impl EmulatedDevice {
    /// The tuple this device would broadcast at true time `now`. Codes come
    /// from the device's own (possibly skewed) clock. Silent devices, and
    /// devices whose skewed clock falls before the epoch, emit nothing.
    pub fn advertise(&self, now: u64) -> Option<Advertisement> {
        if self.behavior != DeviceBehavior::Honest {
            return None;
        }
        let device_time = now as i64 + self.clock_offset_s;
        let interval = interval_index(device_time).ok()?;
        Some(Advertisement {
            device_id: self.device_id.clone(),
            totp_code: totp(&self.secret, interval),
            manufacturer_url: self.manufacturer_url.clone(),
        })
    }
}
