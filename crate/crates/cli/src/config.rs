//! Flat `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys use the long
//! flag names; `-` and `_` are interchangeable.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("config line {}: expected key=value, got {raw:?}", i + 1))?;
            let key = normalize(k);
            if key.is_empty() {
                bail!("config line {}: empty key", i + 1);
            }
            if values.insert(key.clone(), v.trim().to_owned()).is_some() {
                bail!("config line {}: duplicate key {key:?}", i + 1);
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    /// Keys not in `known`.
    pub fn unknown_keys(&self, known: &[&str]) -> Vec<String> {
        self.values.keys().filter(|k| !known.contains(&k.as_str())).cloned().collect()
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(&normalize(key)) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|e| anyhow!("config key {key}: cannot parse {raw:?}: {e}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_normalizes() {
        let c = ConfigFile::parse("# comment\n p = 6\nomega-min=0.5\n\n").unwrap();
        assert_eq!(c.get::<f64>("p").unwrap(), Some(6.0));
        assert_eq!(c.get::<f64>("omega_min").unwrap(), Some(0.5));
        assert_eq!(c.get::<f64>("beta").unwrap(), None);
        assert!(c.get::<usize>("p").is_err() || c.get::<usize>("p").unwrap() == Some(6));
        assert_eq!(c.unknown_keys(&["p"]), vec!["omega_min".to_string()]);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(ConfigFile::parse("p 6").is_err());
        assert!(ConfigFile::parse("p=1\np=2").is_err());
        assert!(ConfigFile::parse("=3").is_err());
    }
}
