//! Flat `key = value` text files used for scene configs, band configs and
//! raw-audio sidecars. `#` starts a comment; blank lines are ignored.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got {raw:?}", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("duplicate key {key:?}")));
            }
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("bad value for {key}: {v:?}")))
            })
            .transpose()
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| Error::Config(format!("missing key {key}")))
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list of floats; missing key gives an empty list.
    pub fn list(&self, key: &str) -> Result<Vec<f64>> {
        match self.raw(key) {
            None => Ok(Vec::new()),
            Some(v) => parse_list(v).map_err(|_| Error::Config(format!("bad list for {key}: {v:?}"))),
        }
    }

    /// Serialises back to `key = value` lines in key order.
    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

pub fn parse_list(v: &str) -> std::result::Result<Vec<f64>, std::num::ParseFloatError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse::<f64>)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_lists() {
        let kv = KeyValues::parse("# scene\nbeta = 1.21\n\nrates = 1, 2,3 # m/s\nname=x\n").unwrap();
        assert_eq!(kv.require::<f64>("beta").unwrap(), 1.21);
        assert_eq!(kv.list("rates").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(kv.raw("name"), Some("x"));
        assert!(kv.require::<f64>("missing").is_err());
        assert!(kv.get::<f64>("name").is_err());
    }

    #[test]
    fn rejects_malformed() {
        assert!(KeyValues::parse("novalue\n").is_err());
        assert!(KeyValues::parse("a=1\na=2\n").is_err());
        assert!(KeyValues::parse("=3\n").is_err());
    }

    #[test]
    fn text_round_trip() {
        let kv = KeyValues::parse("b = 2\na = 1\n").unwrap();
        assert_eq!(KeyValues::parse(&kv.to_text()).unwrap(), kv);
    }
}
