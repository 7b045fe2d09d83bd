use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use trustware_core::{ManufacturerIdentity, ManufacturerName, PublicKey};

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("malformed registry: {0}")]
    Malformed(String),
    #[error("registry io: {0}")]
    Io(#[from] std::io::Error),
}

/// The relying party's list of Trustware-verified manufacturers and their
/// verification keys. Vouchers naming anyone else are rejected outright.
#[derive(Debug, Clone, Default)]
pub struct ManufacturerRegistry {
    entries: BTreeMap<ManufacturerName, PublicKey>,
}

impl ManufacturerRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_identities(
        identities: impl IntoIterator<Item = ManufacturerIdentity>,
    ) -> Result<Self, RegistryError> {
        let mut registry = Self::new();
        for identity in identities {
            registry.insert(identity.name, identity.public_key)?;
        }
        Ok(registry)
    }

    pub fn insert(
        &mut self,
        name: ManufacturerName,
        key: PublicKey,
    ) -> Result<(), RegistryError> {
        if self.entries.contains_key(&name) {
            return Err(RegistryError::Malformed(format!("duplicate manufacturer {name}")));
        }
        self.entries.insert(name, key);
        Ok(())
    }

    pub fn get(&self, name: &ManufacturerName) -> Option<&PublicKey> {
        self.entries.get(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parse the registry file format: one `name,public_key_hex` per line,
    /// blank lines ignored.
    pub fn parse(text: &str) -> Result<Self, RegistryError> {
        let mut registry = Self::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (name, key_hex) = line.split_once(',').ok_or_else(|| {
                RegistryError::Malformed(format!("line {}: expected name,public_key_hex", lineno + 1))
            })?;
            let name = ManufacturerName::parse(name.trim())
                .map_err(|e| RegistryError::Malformed(format!("line {}: {e}", lineno + 1)))?;
            let key = PublicKey::from_hex(key_hex.trim())
                .map_err(|e| RegistryError::Malformed(format!("line {}: {e}", lineno + 1)))?;
            registry.insert(name, key)?;
        }
        Ok(registry)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RegistryError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Render to the registry file format, sorted by name.
    pub fn to_file_format(&self) -> String {
        let mut out = String::new();
        for (name, key) in &self.entries {
            out.push_str(&format!("{},{}\n", name, key.to_hex()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use trustware_core::Keypair;

    #[test]
    fn two_entry_file_loads() {
        let a = Keypair::from_seed(&[1u8; 32]);
        let b = Keypair::from_seed(&[2u8; 32]);
        let text = format!("acme,{}\nglobex,{}\n", a.public().to_hex(), b.public().to_hex());
        let reg = ManufacturerRegistry::parse(&text).unwrap();
        assert_eq!(reg.len(), 2);
        assert_eq!(
            reg.get(&ManufacturerName::parse("acme").unwrap()),
            Some(&a.public())
        );
    }

    #[test]
    fn duplicate_name_is_malformed() {
        let a = Keypair::from_seed(&[1u8; 32]);
        let text = format!("acme,{k}\nacme,{k}\n", k = a.public().to_hex());
        assert!(matches!(
            ManufacturerRegistry::parse(&text),
            Err(RegistryError::Malformed(_))
        ));
    }

    #[test]
    fn empty_file_is_empty_registry() {
        let reg = ManufacturerRegistry::parse("").unwrap();
        assert!(reg.is_empty());
    }

    #[test]
    fn bad_key_is_malformed() {
        assert!(matches!(
            ManufacturerRegistry::parse("acme,zzzz"),
            Err(RegistryError::Malformed(_))
        ));
        assert!(matches!(
            ManufacturerRegistry::parse("acme"),
            Err(RegistryError::Malformed(_))
        ));
    }

    #[test]
    fn file_format_round_trips() {
        let a = Keypair::from_seed(&[3u8; 32]);
        let mut reg = ManufacturerRegistry::new();
        reg.insert(ManufacturerName::parse("acme").unwrap(), a.public()).unwrap();
        let text = reg.to_file_format();
        let again = ManufacturerRegistry::parse(&text).unwrap();
        assert_eq!(again.len(), 1);
        assert_eq!(again.get(&ManufacturerName::parse("acme").unwrap()), Some(&a.public()));
    }
}
