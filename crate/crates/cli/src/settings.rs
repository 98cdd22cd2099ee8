//! Flat `key=value` configuration, overridden key by key from flags.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::CliError;

/// Every recognised key; each has a flag of the same name.
pub const KEYS: &[&str] = &[
    "profile",
    "out",
    "tlist",
    "swindow",
    "bandC",
    "ns",
    "variant",
    "p",
    "phi0",
    "smin",
    "zgrid",
    "margin",
    "dt",
    "n",
    "halfwidth",
    "framespeed",
    "xi",
    "bounds",
    "res",
    "reflectionless",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    map: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse_config(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CliError::input_at(i + 1, format!("expected key=value, found `{line}`")))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(CliError::input_at(i + 1, format!("unknown key `{k}`")));
            }
            map.insert(k.to_string(), v.trim().to_string());
        }
        Ok(Settings { map })
    }

    /// Config file (if any) with `flags` applied on top.
    pub fn resolve(config: Option<&Path>, flags: &[(&'static str, Option<String>)]) -> Result<Self, CliError> {
        let mut s = match config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::input(format!("cannot read config {}: {e}", p.display())))?;
                Self::parse_config(&text)?
            }
            None => Settings::default(),
        };
        for (k, v) in flags {
            debug_assert!(KEYS.contains(k));
            if let Some(v) = v {
                s.map.insert(k.to_string(), v.clone());
            }
        }
        Ok(s)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        self.get(key).map_or(Ok(default), |v| parse_f64(key, v))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        self.get(key).map_or(Ok(default), |v| {
            v.parse()
                .map_err(|_| CliError::input(format!("{key}: expected a nonnegative integer, found `{v}`")))
        })
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.get(key) {
            None | Some("false") | Some("0") => Ok(false),
            Some("true") | Some("1") => Ok(true),
            Some(v) => Err(CliError::input(format!("{key}: expected true or false, found `{v}`"))),
        }
    }

    /// Numbers separated by commas or colons.
    pub fn list_or(&self, key: &str, default: &str) -> Result<Vec<f64>, CliError> {
        let v = self.get(key).unwrap_or(default);
        v.split([',', ':'])
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| parse_f64(key, s))
            .collect()
    }

    pub fn tuple_or<const N: usize>(&self, key: &str, default: &str) -> Result<[f64; N], CliError> {
        let v = self.list_or(key, default)?;
        v.try_into()
            .map_err(|v: Vec<f64>| CliError::input(format!("{key}: expected {N} values, found {}", v.len())))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// SHA-256 over the command name and the sorted resolved keys.
    pub fn hash(&self, command: &str) -> String {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update(b"\n");
        for (k, v) in &self.map {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        hex(&h.finalize())
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::input(format!("{key}: expected a number, found `{v}`")))
}
