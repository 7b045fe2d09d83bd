use std::collections::BTreeMap;

/// Logical-to-real URL mapping, the simulator's stand-in for DNS. Devices
/// and reports carry stable logical URLs (`http://acme.trustware.test/...`)
/// while requests reach whatever loopback port the service actually bound,
/// so reruns produce byte-identical reports on fresh ports.
#[derive(Debug, Clone, Default)]
pub struct Hosts {
    prefixes: BTreeMap<String, String>,
}

impl Hosts {
    pub fn new() -> Self {
        Self::default()
    }

    /// Map a logical base URL to a real one.
    pub fn register(&mut self, logical_base: impl Into<String>, real_base: impl Into<String>) {
        self.prefixes.insert(logical_base.into(), real_base.into());
    }

    /// Rewrite `url` if it starts with a registered logical base; longest
    /// prefix wins, unknown bases pass through untouched.
    pub fn resolve(&self, url: &str) -> String {
        let mut best: Option<(&str, &str)> = None;
        for (logical, real) in &self.prefixes {
            if url.starts_with(logical.as_str()) {
                match best {
                    Some((current, _)) if current.len() >= logical.len() => {}
                    _ => best = Some((logical, real)),
                }
            }
        }
        match best {
            Some((logical, real)) => format!("{real}{}", &url[logical.len()..]),
            None => url.to_owned(),
        }
    }
}
