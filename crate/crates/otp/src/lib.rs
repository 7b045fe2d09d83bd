//! Time-based one-time passwords exactly as Trustware devices and
//! manufacturers compute them: HMAC-SHA1 over the count of 30-second steps
//! since the Unix epoch, dynamically truncated to 31 bits and reduced to six
//! decimal digits. Verification accepts the current interval plus a
//! configurable number of adjacent intervals to absorb clock skew.
//!
//! Everything here is a pure function of its inputs, safe for unrestricted
//! concurrent use.

use hmac::{Hmac, Mac};
use sha1::Sha1;
use thiserror::Error;

use trustware_core::{DeviceSecret, TotpCode};

/// Seconds per TOTP interval.
pub const INTERVAL_SECONDS: u64 = 30;

/// Default number of adjacent intervals accepted on verification.
pub const DEFAULT_SKEW_INTERVALS: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OtpError {
    #[error("time before the Unix epoch")]
    NegativeTime,
    #[error("code is not 6 decimal digits: {0:?}")]
    MalformedCode(String),
}

/// Count of 30-second steps since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntervalIndex(u64);

impl IntervalIndex {
    pub fn value(&self) -> u64 {
        self.0
    }

    pub fn from_value(v: u64) -> Self {
        Self(v)
    }
}

/// Interval containing `unix_time_s`.
pub fn interval_index(unix_time_s: i64) -> Result<IntervalIndex, OtpError> {
    if unix_time_s < 0 {
        return Err(OtpError::NegativeTime);
    }
    Ok(IntervalIndex(unix_time_s as u64 / INTERVAL_SECONDS))
}

/// The six-digit code for a secret at an interval.
pub fn totp(secret: &DeviceSecret, interval: IntervalIndex) -> TotpCode {
    let mut mac = Hmac::<Sha1>::new_from_slice(&secret.key_bytes())
        .expect("hmac accepts any key length");
    mac.update(&interval.0.to_be_bytes());
    let digest = mac.finalize().into_bytes();
    // dynamic truncation: low nibble of the last byte picks a 4-byte window,
    // high bit masked to 31 bits
    let offset = (digest[19] & 0x0f) as usize;
    let bin = (u32::from(digest[offset] & 0x7f) << 24)
        | (u32::from(digest[offset + 1]) << 16)
        | (u32::from(digest[offset + 2]) << 8)
        | u32::from(digest[offset + 3]);
    TotpCode::from_value(bin % 1_000_000)
}

/// Check `code` against the window of intervals within `skew_intervals` of
/// the one containing `now`. Returns the matched interval, preferring the
/// current interval, then earlier ones, then later ones, so audit logs are
/// deterministic when codes collide.
pub fn verify_totp(
    secret: &DeviceSecret,
    code: &str,
    now: i64,
    skew_intervals: u32,
) -> Result<Option<IntervalIndex>, OtpError> {
    let code = TotpCode::parse(code).map_err(|_| OtpError::MalformedCode(code.to_owned()))?;
    let current = interval_index(now)?;
    let mut candidates = vec![current];
    for step in 1..=u64::from(skew_intervals) {
        if let Some(earlier) = current.0.checked_sub(step) {
            candidates.push(IntervalIndex(earlier));
        }
    }
    for step in 1..=u64::from(skew_intervals) {
        candidates.push(IntervalIndex(current.0 + step));
    }
    Ok(candidates.into_iter().find(|iv| totp(secret, *iv) == code))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn secret() -> DeviceSecret {
        DeviceSecret::parse("GEZDGNBVGY3TQOJQ").unwrap()
    }

    #[test]
    fn interval_index_floors() {
        assert_eq!(interval_index(0).unwrap().value(), 0);
        assert_eq!(interval_index(29).unwrap().value(), 0);
        assert_eq!(interval_index(30).unwrap().value(), 1);
        assert_eq!(interval_index(59).unwrap().value(), 1);
        // 1111111109 / 30, checked by hand
        assert_eq!(interval_index(1_111_111_109).unwrap().value(), 37_037_036);
        assert_eq!(interval_index(-1), Err(OtpError::NegativeTime));
    }

    #[test]
    fn totp_is_deterministic() {
        let iv = IntervalIndex::from_value(12345);
        assert_eq!(totp(&secret(), iv), totp(&secret(), iv));
    }

    #[test]
    fn verify_matches_current_interval() {
        let now = 1_699_999_990i64;
        let code = totp(&secret(), interval_index(now).unwrap());
        let matched = verify_totp(&secret(), code.as_str(), now, 1).unwrap();
        assert_eq!(matched, Some(interval_index(now).unwrap()));
    }

    #[test]
    fn verify_accepts_adjacent_interval() {
        let now = 1_699_999_990i64;
        let previous = interval_index(now - 30).unwrap();
        let code = totp(&secret(), previous);
        let matched = verify_totp(&secret(), code.as_str(), now, 1).unwrap();
        assert_eq!(matched, Some(previous));

        let next = interval_index(now + 30).unwrap();
        let code = totp(&secret(), next);
        let matched = verify_totp(&secret(), code.as_str(), now, 1).unwrap();
        assert_eq!(matched, Some(next));
    }

    #[test]
    fn verify_rejects_outside_window() {
        let now = 1_699_999_990i64;
        let stale = interval_index(now - 90).unwrap();
        let code = totp(&secret(), stale);
        assert_eq!(verify_totp(&secret(), code.as_str(), now, 1).unwrap(), None);
    }

    #[test]
    fn verify_rejects_malformed_code() {
        assert!(matches!(
            verify_totp(&secret(), "12345", 1_000_000, 1),
            Err(OtpError::MalformedCode(_))
        ));
        assert!(matches!(
            verify_totp(&secret(), "12345x", 1_000_000, 1),
            Err(OtpError::MalformedCode(_))
        ));
    }

    #[test]
    fn zero_skew_means_exact_interval_only() {
        let now = 600i64;
        let prev_code = totp(&secret(), interval_index(now - 30).unwrap());
        assert_eq!(verify_totp(&secret(), prev_code.as_str(), now, 0).unwrap(), None);
        let cur_code = totp(&secret(), interval_index(now).unwrap());
        assert!(verify_totp(&secret(), cur_code.as_str(), now, 0).unwrap().is_some());
    }

    #[test]
    fn window_never_dips_below_epoch() {
        let code = totp(&secret(), IntervalIndex::from_value(0));
        // now in interval 0 with skew 2: only intervals 0, 1, 2 exist
        assert_eq!(
            verify_totp(&secret(), code.as_str(), 10, 2).unwrap(),
            Some(IntervalIndex::from_value(0))
        );
    }
}
