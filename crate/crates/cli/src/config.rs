//! Plain-text `key=value` configuration files and flag-override merging.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Ordered key=value map; `BTreeMap` keeps manifests deterministic.
#[derive(Debug, Clone, Default)]
pub struct KeyValueFile {
    pub entries: BTreeMap<String, String>,
}

impl KeyValueFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected key=value, found `{raw}`", lineno + 1);
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(KeyValueFile { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .with_context(|| format!("config key `{key}`: bad number `{v}`"))
            })
            .transpose()
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>()
                    .with_context(|| format!("config key `{key}`: bad integer `{v}`"))
            })
            .transpose()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }
}

/// Writes a manifest sufficient to reproduce the run: the resolved
/// configuration, seeds and the crate version. Deliberately timestamp-free
/// so reruns are byte-identical.
pub fn write_manifest(path: &Path, resolved: &KeyValueFile) -> Result<()> {
    let mut text = String::new();
    text.push_str(&format!("version={}\n", env!("CARGO_PKG_VERSION")));
    for (k, v) in &resolved.entries {
        text.push_str(&format!("{k}={v}\n"));
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
