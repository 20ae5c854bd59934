//! Line-based `key = value` configuration.
//!
//! ```text
//! # comment
//! seed = 42
//! d = 1
//! [potential]
//! name = holder
//! params = alpha=0.5, L=1
//! ```
//!
//! A `[section]` line prefixes the keys that follow with `section.`; keys may
//! also be written dotted (`potential.name = holder`). Values run to the end
//! of the line; surrounding double quotes are stripped. Lists are
//! comma-separated. Keys under `manifest.` are ignored, so a run manifest is
//! itself a valid config.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{config_err, HarnessError, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

fn valid_key(k: &str) -> bool {
    !k.is_empty()
        && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
        && !k.starts_with('.')
        && !k.ends_with('.')
        && !k.contains("..")
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: &str| config_err(format!("line {}: {msg}: `{}`", no + 1, raw.trim()));
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| at("unterminated section header"))?.trim();
                if !name.is_empty() && (!valid_key(name) || name.contains('.')) {
                    return Err(at("bad section name"));
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| at("expected key = value"))?;
            let k = k.trim();
            if !valid_key(k) {
                return Err(at("bad key"));
            }
            let key = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
            let mut v = v.trim();
            if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
                v = &v[1..v.len() - 1];
            }
            if entries.insert(key.clone(), v.to_string()).is_some() {
                return Err(at(&format!("duplicate key {key}")));
            }
        }
        Ok(Config { entries })
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Config::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.str(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| config_err(format!("{key}: cannot parse `{v}`"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| config_err(format!("missing required key {key}")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.str(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| config_err(format!("{key}: cannot parse list item `{s}`"))))
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    /// Keys not in `known`, other than `manifest.*`.
    pub fn unknown(&self, known: &[&str]) -> Vec<String> {
        self.entries.keys().filter(|k| !known.contains(&k.as_str()) && !k.starts_with("manifest.")).cloned().collect()
    }

    /// Error on keys outside the schema (typos, misplaced sections).
    pub fn check_keys(&self, known: &[&str]) -> Result<()> {
        let left = self.unknown(known);
        if left.is_empty() {
            Ok(())
        } else {
            Err(config_err(format!("unknown keys: {}", left.join(", "))))
        }
    }

    /// Every entry except `manifest.*`, sorted, in dotted form.
    pub fn echo(&self) -> Vec<(String, String)> {
        self.entries.iter().filter(|(k, _)| !k.starts_with("manifest.")).map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_dotted_keys() {
        let c = Config::parse("seed = 7\n[potential]\nname = holder # trailing\nparams = \"alpha=0.5, L=2\"\n[]\nplan.eta = 0.1\n").unwrap();
        assert_eq!(c.require::<u64>("seed").unwrap(), 7);
        assert_eq!(c.str("potential.name"), Some("holder"));
        assert_eq!(c.str("potential.params"), Some("alpha=0.5, L=2"));
        assert_eq!(c.get::<f64>("plan.eta").unwrap(), Some(0.1));
        c.check_keys(&["seed", "potential.name", "potential.params", "plan.eta"]).unwrap();
    }

    #[test]
    fn errors() {
        assert!(Config::parse("a = 1\na = 2").is_err());
        assert!(Config::parse("just words").is_err());
        assert!(Config::parse("[open\n").is_err());
        assert!(Config::parse("bad key = 1").is_err());
        let c = Config::parse("x = abc\ntypo = 1\nmanifest.version = 1").unwrap();
        assert!(c.get::<f64>("x").is_err());
        assert_eq!(c.unknown(&["x"]), vec!["typo".to_string()]);
        assert!(c.check_keys(&["x"]).is_err());
    }

    #[test]
    fn lists() {
        let c = Config::parse("etas = 0.02, 0.05,0.1").unwrap();
        assert_eq!(c.list::<f64>("etas").unwrap().unwrap(), vec![0.02, 0.05, 0.1]);
    }
}
