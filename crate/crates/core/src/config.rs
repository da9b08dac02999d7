//! `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys use the long
//! flag names without the leading dashes (`g-range`, `transient`, ...);
//! underscores are accepted in place of dashes.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("config line {}: expected key=value", lineno + 1))
            })?;
            let key = normalize(k);
            if key.is_empty() {
                return Err(Error::Parse(format!(
                    "config line {}: empty key",
                    lineno + 1
                )));
            }
            entries.insert(key, v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize(key)).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

fn normalize(key: &str) -> String {
    key.trim()
        .trim_start_matches("--")
        .replace('_', "-")
        .to_ascii_lowercase()
}
