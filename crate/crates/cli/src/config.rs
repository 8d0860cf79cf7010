//! `key = value` config files supplying flag defaults.

use std::collections::BTreeMap;

use scalelab::error::{Error, Result};

pub fn parse(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Invalid(format!("config line {}: expected key = value", i + 1)))?;
        let key = k.trim().trim_start_matches("--").to_string();
        if key.is_empty() {
            return Err(Error::Invalid(format!("config line {}: empty key", i + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

/// Inserts `--key value` for every config key the subcommand accepts and
/// the command line does not already set. Returns the keys that were not
/// recognised.
pub fn merge(argv: &mut Vec<String>, known: &[String], defaults: &BTreeMap<String, String>) -> Vec<String> {
    let mut unused = Vec::new();
    let present = |argv: &[String], key: &str| {
        let flag = format!("--{key}");
        argv.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
    };
    for (k, v) in defaults {
        if !known.iter().any(|x| x == k) {
            unused.push(k.clone());
            continue;
        }
        if !present(argv, k) {
            argv.push(format!("--{k}={v}"));
        }
    }
    unused
}
