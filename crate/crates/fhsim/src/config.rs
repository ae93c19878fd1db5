//! Plain `key=value` settings files. Keys are the long flag names without
//! the leading dashes; `#` starts a comment. Flags given on the command line
//! take precedence.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, (usize, String)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::parse(i + 1, "expected `key=value`"))?;
            let key = key.trim().trim_start_matches("--").to_string();
            if key.is_empty() {
                return Err(Error::parse(i + 1, "empty key"));
            }
            values.insert(key, (i + 1, value.trim().to_string()));
        }
        Ok(Config { values })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(_, v)| v.as_str())
    }

    /// Keys not in `known`, with their line numbers.
    pub fn unknown_keys<'a>(&'a self, known: &[&str]) -> Vec<(usize, &'a str)> {
        self.values.iter().filter(|(k, _)| !known.contains(&k.as_str())).map(|(k, (l, _))| (*l, k.as_str())).collect()
    }

    /// `flag` when given, otherwise the parsed config value for `key`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some((line, v)) => {
                v.parse().map(Some).map_err(|_| Error::parse(*line, format!("invalid value `{v}` for `{key}`")))
            }
        }
    }
}
