//! Flat `key = value` configuration text.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are unique.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
    lines: BTreeMap<String, usize>,
    source: String,
}

impl KvConfig {
    pub fn new() -> Self {
        KvConfig::default()
    }

    /// Parses `text`; `source` names it in error messages.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut cfg = KvConfig { source: source.to_string(), ..KvConfig::default() };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(source, i + 1, format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::parse(source, i + 1, "empty key"));
            }
            if cfg.entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(Error::parse(source, i + 1, format!("duplicate key `{key}`")));
            }
            cfg.lines.insert(key.to_string(), i + 1);
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get_parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e: T::Err| {
                let line = self.lines.get(key).copied().unwrap_or(0);
                Error::parse(&self.source, line, format!("bad value for `{key}`: {e}"))
            }),
        }
    }

    /// Comma-separated list value.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(v) = self.get(key) else { return Ok(None) };
        let line = self.lines.get(key).copied().unwrap_or(0);
        v.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse().map_err(|e: T::Err| Error::parse(&self.source, line, format!("bad item `{s}` in `{key}`: {e}")))
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_prints() {
        let cfg = KvConfig::parse("# plan\ntasks = 1, 5\n\nruns=3\n", "plan").unwrap();
        assert_eq!(cfg.get("runs"), Some("3"));
        assert_eq!(cfg.get_list::<u8>("tasks").unwrap(), Some(vec![1, 5]));
        assert_eq!(cfg.get_parsed::<u32>("missing").unwrap(), None);
        let again = KvConfig::parse(&cfg.to_text(), "again").unwrap();
        assert_eq!(again.get("tasks"), Some("1, 5"));
    }

    #[test]
    fn reports_line_numbers() {
        let err = KvConfig::parse("a = 1\nnonsense\n", "f").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = KvConfig::parse("a = 1\n\na = 2\n", "f").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let cfg = KvConfig::parse("x = 1\ny = q\n", "f").unwrap();
        assert!(matches!(cfg.get_parsed::<u32>("y"), Err(Error::Parse { line: 2, .. })));
    }
}
