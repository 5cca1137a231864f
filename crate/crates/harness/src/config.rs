//! Flat `key = value` experiment configuration.
//!
//! One entry per line, `#` starts a comment. Keys use `-` or `_`
//! interchangeably. Command-line values override file values.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use crate::error::{HarnessError, Result};

#[derive(Debug, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
    read: RefCell<BTreeSet<String>>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-").to_ascii_lowercase()
}

impl Params {
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                HarnessError::usage(format!("config line {}: expected `key = value`, got `{raw}`", i + 1))
            })?;
            let key = normalize(k);
            if key.is_empty() {
                return Err(HarnessError::usage(format!("config line {}: empty key", i + 1)));
            }
            if p.values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(HarnessError::usage(format!(
                    "config line {}: duplicate key `{key}`",
                    i + 1
                )));
            }
        }
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(normalize(key), value.into());
    }

    /// Parse a `key=value` override from the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| HarnessError::usage(format!("--set expects key=value, got `{pair}`")))?;
        self.set(k, v.trim());
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<&str> {
        let key = normalize(key);
        let v = self.values.get(&key).map(String::as_str);
        self.read.borrow_mut().insert(key);
        v
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| HarnessError::usage(format!("bad value for `{key}`: `{v}` ({e})")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        let s = s.trim();
                        s.parse::<T>()
                            .map_err(|e| HarnessError::usage(format!("bad entry `{s}` in `{key}` ({e})")))
                    })
                    .collect()
            })
            .transpose()
    }

    /// Reject keys that no reader asked for.
    pub fn finish(&self) -> Result<()> {
        let read = self.read.borrow();
        let unknown: Vec<&str> = self
            .values
            .keys()
            .filter(|k| !read.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::usage(format!(
                "unknown configuration keys: {}",
                unknown.join(", ")
            )))
        }
    }
}
