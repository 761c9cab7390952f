//! Flat `key = value` configuration.
//!
//! Keys name `RunConfig` fields; nested fields use dotted paths
//! (`integrator.rtol`, `guard.mode`) and model parameters live under
//! `params.` (`params.nu`). Values are read as JSON where possible and as
//! bare strings otherwise.

use std::path::Path;

use goy_core::controller::{Mode, RunConfig};
use goy_core::GoyParams;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}:{line}: expected `key = value`, found `{text}`")]
    Syntax { path: String, line: usize, text: String },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    BadValue { key: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error(transparent)]
    Invalid(#[from] goy_core::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub params: GoyParams,
    #[serde(flatten)]
    pub run: RunConfig,
}

impl Settings {
    pub fn new(mode: Mode) -> Self {
        let params = GoyParams::default();
        let mut run = RunConfig::new(&params);
        run.mode = mode;
        if mode == Mode::Ablation {
            run.t_end = run.spin_up_t + 200.0;
            run.stats_from = run.spin_up_t;
        }
        Self { params, run }
    }

    fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("settings serialize")
    }

    /// Applies a list of `(key, raw value)` pairs in order.
    pub fn apply<'a, I>(&mut self, pairs: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut root = self.to_value();
        let mut last_key = String::new();
        for (key, raw) in pairs {
            set_path(&mut root, key, raw)?;
            last_key = key.to_string();
        }
        *self = serde_json::from_value(root).map_err(|e| ConfigError::BadValue {
            key: last_key,
            reason: e.to_string(),
        })?;
        Ok(())
    }

    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        self.apply([(key, raw)])
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.run.validate(&self.params)?;
        Ok(())
    }

    /// Every key with its effective value, one per line, sorted by key.
    pub fn echo(&self) -> String {
        let mut lines = Vec::new();
        flatten("", &self.to_value(), &mut lines);
        lines.sort();
        lines.into_iter().map(|l| l + "\n").collect()
    }
}

fn set_path(root: &mut Value, key: &str, raw: &str) -> Result<(), ConfigError> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts {
        node = node
            .as_object_mut()
            .and_then(|m| m.get_mut(*part))
            .ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
    }
    if node.is_object() {
        return Err(ConfigError::UnknownKey(key.to_string()));
    }
    let value = match serde_json::from_str::<Value>(raw) {
        Ok(v) if !node.is_string() || v.is_string() => v,
        _ => Value::String(raw.to_string()),
    };
    let kind = |v: &Value| std::mem::discriminant(v);
    if kind(&value) != kind(node) && !(node.is_null() || value.is_null()) {
        return Err(ConfigError::BadValue {
            key: key.to_string(),
            reason: format!("expected {}, found `{raw}`", describe(node)),
        });
    }
    *node = value;
    Ok(())
}

fn describe(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a word",
        Value::Array(_) => "a JSON array",
        Value::Object(_) => "a table",
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::String(s) => out.push(format!("{prefix} = {s}")),
        other => out.push(format!("{prefix} = {other}")),
    }
}

/// Parses the text of a configuration file into ordered pairs.
pub fn parse_pairs(text: &str, origin: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
            path: origin.to_string(),
            line: n + 1,
            text: line.to_string(),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(ConfigError::Syntax {
                path: origin.to_string(),
                line: n + 1,
                text: line.to_string(),
            });
        }
        pairs.push((k.to_string(), v.to_string()));
    }
    Ok(pairs)
}

pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_pairs(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_roundtrips() {
        let mut s = Settings::new(Mode::Train);
        s.set("integrator.rtol", "1e-8").unwrap();
        s.set("guard.mode", "clamp").unwrap();
        s.set("params.nu", "2e-8").unwrap();
        let text = s.echo();
        let mut back = Settings::new(Mode::Reference);
        let pairs = parse_pairs(&text, "echo").unwrap();
        back.apply(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap();
        assert_eq!(back, s);
        assert!(text.contains("integrator.rtol = 0.00000001\n") || text.contains("integrator.rtol = 1e-8\n"));
    }

    #[test]
    fn rejects_unknown_and_mistyped() {
        let mut s = Settings::new(Mode::Train);
        assert!(matches!(s.set("integrator.rtl", "1"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(s.set("integrator", "1"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(s.set("window", "big"), Err(ConfigError::BadValue { .. })));
        assert!(s.set("guard.mode", "sideways").is_err());
        assert!(s.set("window", "-3").is_err());
    }

    #[test]
    fn syntax_errors_carry_line() {
        let err = parse_pairs("window = 10\n# note\nnonsense\n", "f.cfg").unwrap_err();
        assert!(err.to_string().starts_with("f.cfg:3:"));
        assert_eq!(parse_pairs("a = 1 # trailing\n\n", "f").unwrap(), vec![("a".into(), "1".into())]);
    }

    #[test]
    fn forcing_as_array() {
        let mut s = Settings::new(Mode::Reference);
        s.set("params.forcing", "[0.01, 0]").unwrap();
        assert_eq!(s.params.forcing.re, 0.01);
    }
}
