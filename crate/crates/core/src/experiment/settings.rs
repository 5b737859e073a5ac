//! Plain-text `key = value` configuration files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Keys are case-insensitive and `_` is treated as `-`, so `patch_radius`
/// and `patch-radius` name the same setting. Lines starting with `#` are
/// comments.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!(
                    "line {}: expected 'key = value', got '{line}'",
                    n + 1
                ))
            })?;
            let key = normalize_key(key);
            if key.is_empty() {
                return Err(Error::Parse(format!("line {}: empty key", n + 1)));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Settings { values })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(&normalize_key(key)).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Parse(format!("bad value '{v}' for setting '{key}'")))
            })
            .transpose()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}

/// Parses radius lists such as `1..15`, `0,2,4` or `1..3,8`; ranges are
/// inclusive. The result must be non-empty and strictly increasing.
pub fn parse_d_values(s: &str) -> Result<Vec<usize>> {
    let bad = |part: &str| Error::Parse(format!("bad radius list entry '{part}' in '{s}'"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: usize = lo.trim().parse().map_err(|_| bad(part))?;
            let hi: usize = hi.trim().parse().map_err(|_| bad(part))?;
            if lo > hi {
                return Err(bad(part));
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| bad(part))?);
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("empty radius list".into()));
    }
    if out.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parse(format!(
            "radius list '{s}' must be strictly increasing"
        )));
    }
    Ok(out)
}
