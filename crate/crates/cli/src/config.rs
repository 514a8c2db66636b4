//! Flat `key = value` experiment files. Blank lines and lines starting with
//! `#` are ignored; keys may repeat (later values win for scalar settings,
//! all values are kept for lists such as `formula`).

use std::path::Path;
use std::str::FromStr;

use tempocf_core::engine::{GaConfig, Strategy};
use tempocf_core::model::Hyper;

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: Vec<(String, String)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Input(format!("config line {}: expected `key = value`", k + 1))
            })?;
            entries.push((key.trim().to_string(), value.trim().to_string()));
        }
        Ok(KeyValues { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn all(&self, key: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .collect()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| CliError::Input(format!("`{key}`: cannot parse `{v}`: {e}")))
            })
            .transpose()
    }

    /// Rejects keys outside `known`, so that typos do not go unnoticed.
    pub fn check_keys(&self, known: &[&str]) -> Result<(), CliError> {
        match self.keys().find(|k| !known.contains(k)) {
            Some(k) => Err(CliError::Input(format!("unknown config key `{k}`"))),
            None => Ok(()),
        }
    }
}

pub const GA_KEYS: [&str; 16] = [
    "population_size",
    "generations",
    "p_c",
    "p_mut",
    "selection_fraction",
    "patience",
    "epsilon",
    "seed",
    "t",
    "alpha",
    "beta",
    "gamma",
    "delta",
    "strategy",
    "mar_max_retries",
    "timing",
];

pub const HYPER_KEYS: [&str; 4] = ["epochs", "learning_rate", "l2", "batch_size"];

fn set<T: FromStr>(kv: &KeyValues, key: &str, slot: &mut T) -> Result<(), CliError>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = kv.parsed(key)? {
        *slot = v;
    }
    Ok(())
}

pub fn ga_config(kv: &KeyValues) -> Result<GaConfig, CliError> {
    let mut c = GaConfig::default();
    set(kv, "population_size", &mut c.population_size)?;
    set(kv, "generations", &mut c.generations)?;
    set(kv, "p_c", &mut c.p_c)?;
    set(kv, "p_mut", &mut c.p_mut)?;
    set(kv, "selection_fraction", &mut c.selection_fraction)?;
    set(kv, "patience", &mut c.patience)?;
    set(kv, "epsilon", &mut c.epsilon)?;
    set(kv, "seed", &mut c.seed)?;
    set(kv, "t", &mut c.t)?;
    set(kv, "alpha", &mut c.weights.alpha)?;
    set(kv, "beta", &mut c.weights.beta)?;
    set(kv, "gamma", &mut c.weights.gamma)?;
    set(kv, "delta", &mut c.weights.delta)?;
    set(kv, "mar_max_retries", &mut c.mar_max_retries)?;
    if let Some(s) = kv.get("strategy") {
        c.strategy = s.parse::<Strategy>()?;
    }
    c.validate()?;
    Ok(c)
}

pub fn hyper(kv: &KeyValues) -> Result<Hyper, CliError> {
    let mut h = Hyper::default();
    set(kv, "epochs", &mut h.epochs)?;
    set(kv, "learning_rate", &mut h.learning_rate)?;
    set(kv, "l2", &mut h.l2)?;
    set(kv, "batch_size", &mut h.batch_size)?;
    set(kv, "seed", &mut h.seed)?;
    Ok(h)
}
