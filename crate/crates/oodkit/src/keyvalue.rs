//! Plain-text `key=value` files: one pair per line, `#` comments, blank lines ignored.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{read_string, FileError};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues {
    path: std::path::PathBuf,
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str, path: &Path) -> Result<Self, FileError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(FileError::parse(path, i + 1, format!("expected key=value, got {line:?}")));
            };
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(FileError::parse(path, i + 1, "empty key"));
            }
            if entries.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(FileError::parse(path, i + 1, format!("duplicate key {key:?}")));
            }
        }
        Ok(Self { path: path.to_path_buf(), entries })
    }

    pub fn read(path: &Path) -> Result<Self, FileError> {
        Self::parse(&read_string(path)?, path)
    }

    /// Keys in sorted order.
    pub fn keys(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.keys().map(String::as_str)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    /// Parsed value of `key`, if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, FileError>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| FileError::parse(&self.path, *line, format!("{key}: {e}"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, FileError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| FileError::parse(&self.path, 0, format!("missing key {key:?}")))
    }
}

/// Renders pairs in the given order, one per line.
pub fn render(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}
