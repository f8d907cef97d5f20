//! JSON config files and flag-value parsing.
//!
//! A config file is a single JSON object whose keys are the long flag
//! names of the subcommand it is passed to (`{"dim": 400, "seed": 7}`).
//! Explicit command-line flags take precedence; unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::{usage, CliError, CliResult};

pub(crate) struct ConfigMap {
    entries: serde_json::Map<String, Value>,
    origin: String,
}

impl ConfigMap {
    /// Load a config file, or an empty map when no path was given.
    pub(crate) fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self {
                entries: serde_json::Map::new(),
                origin: String::new(),
            });
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {}", path.display(), e)))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| usage(format!("bad JSON in {}: {}", path.display(), e)))?;
        match value {
            Value::Object(entries) => Ok(Self {
                entries,
                origin: path.display().to_string(),
            }),
            _ => Err(usage(format!(
                "config {} must be a JSON object",
                path.display()
            ))),
        }
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.entries.remove(key)
    }

    fn bad_type(&self, key: &str, want: &str) -> CliError {
        usage(format!(
            "config {}: key '{}' must be {}",
            self.origin, key, want
        ))
    }

    pub(crate) fn take_usize(&mut self, key: &str) -> CliResult<Option<usize>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Number(n)) => n
                .as_u64()
                .map(|v| Some(v as usize))
                .ok_or_else(|| self.bad_type(key, "a nonnegative integer")),
            Some(_) => Err(self.bad_type(key, "a nonnegative integer")),
        }
    }

    pub(crate) fn take_u32(&mut self, key: &str) -> CliResult<Option<u32>> {
        Ok(self.take_usize(key)?.map(|v| v as u32))
    }

    pub(crate) fn take_u64(&mut self, key: &str) -> CliResult<Option<u64>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Number(n)) => n
                .as_u64()
                .map(Some)
                .ok_or_else(|| self.bad_type(key, "a nonnegative integer")),
            Some(_) => Err(self.bad_type(key, "a nonnegative integer")),
        }
    }

    pub(crate) fn take_f64(&mut self, key: &str) -> CliResult<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Number(n)) => n
                .as_f64()
                .map(Some)
                .ok_or_else(|| self.bad_type(key, "a number")),
            Some(_) => Err(self.bad_type(key, "a number")),
        }
    }

    pub(crate) fn take_bool(&mut self, key: &str) -> CliResult<Option<bool>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::Bool(b)) => Ok(Some(b)),
            Some(_) => Err(self.bad_type(key, "a boolean")),
        }
    }

    pub(crate) fn take_string(&mut self, key: &str) -> CliResult<Option<String>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(self.bad_type(key, "a string")),
        }
    }

    pub(crate) fn take_path(&mut self, key: &str) -> CliResult<Option<PathBuf>> {
        Ok(self.take_string(key)?.map(PathBuf::from))
    }

    /// A list flag: either a string in the CLI syntax ("1,4..6") or a
    /// JSON array of integers.
    pub(crate) fn take_list(&mut self, key: &str) -> CliResult<Option<Vec<usize>>> {
        match self.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => parse_list(&s).map(Some),
            Some(Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    match item.as_u64() {
                        Some(v) => out.push(v as usize),
                        None => return Err(self.bad_type(key, "an array of integers")),
                    }
                }
                Ok(Some(out))
            }
            Some(_) => Err(self.bad_type(key, "a list string or integer array")),
        }
    }

    /// Every key must have been consumed by now.
    pub(crate) fn finish(self) -> CliResult<()> {
        if let Some(key) = self.entries.keys().next() {
            return Err(usage(format!(
                "config {}: unknown key '{}'",
                self.origin, key
            )));
        }
        Ok(())
    }
}

/// Parse a comma-separated list of integers and inclusive ranges:
/// "1,5,10" or "1..50" or "1,4..6,9".
pub(crate) fn parse_list(text: &str) -> CliResult<Vec<usize>> {
    let mut out = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        if let Some((lo, hi)) = token.split_once("..") {
            let lo: usize = lo
                .trim()
                .parse()
                .map_err(|_| usage(format!("bad range start '{}'", token)))?;
            let hi: usize = hi
                .trim()
                .parse()
                .map_err(|_| usage(format!("bad range end '{}'", token)))?;
            if lo > hi {
                return Err(usage(format!("empty range '{}'", token)));
            }
            out.extend(lo..=hi);
        } else {
            out.push(
                token
                    .parse()
                    .map_err(|_| usage(format!("bad integer '{}'", token)))?,
            );
        }
    }
    if out.is_empty() {
        return Err(usage(format!("empty list '{}'", text)));
    }
    Ok(out)
}

/// The comment line placed at the top of every text artifact.
pub(crate) fn header_line(subcommand: &str, seed: u64) -> String {
    format!("vsa {} {} seed={}", crate::TOOL_VERSION, subcommand, seed)
}
