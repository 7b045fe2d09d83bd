/// Scope-based advertisement visibility: the simulator's stand-in for radio
/// range. A listener hears exactly the devices that share its scope, in a
/// fixed registration order, so delivery is reliable and deterministic.
#[derive(Debug, Default, Clone)]
pub struct AdvertisementBus {
    subscriptions: Vec<(String, String)>, // (listener, scope)
}

impl AdvertisementBus {
    pub fn new() -> Self {
        Self::default()
    }

    /// Join `listener` to `scope`. Registration order is delivery order.
    pub fn subscribe(&mut self, listener: impl Into<String>, scope: impl Into<String>) {
        self.subscriptions.push((listener.into(), scope.into()));
    }

    /// Listeners that hear a broadcast in `scope`, in registration order.
    pub fn listeners_in_scope(&self, scope: &str) -> Vec<&str> {
        self.subscriptions
            .iter()
            .filter(|(_, s)| s == scope)
            .map(|(l, _)| l.as_str())
            .collect()
    }
}
