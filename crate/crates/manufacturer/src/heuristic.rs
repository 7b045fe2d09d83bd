use crate::server::UsageHistory;

/// How a manufacturer maps a device's history to a trust value. Heuristics
/// vary by manufacturer; the protocol only requires that bot-like usage
/// scores low.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeuristicKind {
    /// Trust is the inverse of the number of prior uses:
    /// `floor(100 / (1 + success_count))`.
    InverseUse,
    /// Fixed trust regardless of history.
    Constant(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrustHeuristic {
    pub kind: HeuristicKind,
    /// Minimum seconds between two successful authentications of one device.
    pub rate_limit_s: u64,
}

impl Default for TrustHeuristic {
    fn default() -> Self {
        Self { kind: HeuristicKind::InverseUse, rate_limit_s: 10 }
    }
}

impl TrustHeuristic {
    /// Trust for a device with the given history, in 0..=100.
    pub fn compute_trust(&self, usage: &UsageHistory) -> u8 {
        match self.kind {
            HeuristicKind::InverseUse => (100 / (1 + usage.success_count)) as u8,
            HeuristicKind::Constant(v) => v.min(100),
        }
    }
}
