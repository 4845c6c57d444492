//! Plain `key = value` run configuration with command-line overrides.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value, got {line:?}", n + 1)))?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim();
        if key.is_empty() {
            return Err(CliError::Config("empty key".into()));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn apply_override(&mut self, kv: &str) -> Result<(), CliError> {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Config(format!("override {kv:?} is not key=value")))?;
        self.set(k, v)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| CliError::Config(format!("{key} = {v:?}: {e}"))),
        }
    }

    pub fn positive(&self, key: &str, default: f64) -> Result<f64, CliError> {
        let v: f64 = self.get(key, default)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Config(format!("{key} must be positive, got {v}")));
        }
        Ok(v)
    }

    /// Comma-separated list; an empty value is an empty list.
    pub fn list<T: FromStr + Clone>(&self, key: &str, default: &[T]) -> Result<Vec<T>, CliError>
    where
        T::Err: Display,
    {
        let Some(v) = self.raw(key) else {
            return Ok(default.to_vec());
        };
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e| CliError::Config(format!("{key}: {s:?}: {e}"))))
            .collect()
    }

    /// Errors on keys that no command read, so typos do not pass silently.
    pub fn reject_unused(&self) -> Result<(), CliError> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self.values.keys().filter(|k| !used.contains(*k)).map(String::as_str).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!("unknown config keys: {}", unknown.join(", "))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let mut cfg = RunConfig::parse("# header\nmass = 2.5\n\nn_grid=512 # inline\n").unwrap();
        cfg.apply_override("mass=3").unwrap();
        assert_eq!(cfg.get("mass", 1.0).unwrap(), 3.0);
        assert_eq!(cfg.get("n_grid", 0usize).unwrap(), 512);
        assert_eq!(cfg.get("hbar", 1.0).unwrap(), 1.0);
        cfg.reject_unused().unwrap();
    }

    #[test]
    fn rejects_garbage() {
        assert!(RunConfig::parse("just words").is_err());
        let cfg = RunConfig::parse("mass = heavy\ntypo = 1").unwrap();
        assert!(cfg.get("mass", 1.0).is_err());
        assert!(cfg.reject_unused().is_err());
        assert!(cfg.positive("mass", 1.0).is_err());
        let cfg = RunConfig::parse("taus =").unwrap();
        assert!(cfg.list::<f64>("taus", &[1.0]).unwrap().is_empty());
    }
}
