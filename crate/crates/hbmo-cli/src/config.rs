//! Flat `key = value` configuration files and flag-precedence resolution.
//!
//! Precedence: explicit command-line flag > config file entry > environment
//! (`HBMO_SEED`, seed only) > built-in default. Config keys are the long
//! flag names (e.g. `seed = 7`, `format = csv`, `beta = 8`).

use clap::parser::{ArgMatches, ValueSource};
use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

pub const SEED_ENV_VAR: &str = "HBMO_SEED";

#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    entries: HashMap<String, String>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}
impl std::error::Error for ConfigError {}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
            .map_err(|e| ConfigError(format!("config {}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<FileConfig, String> {
        let mut entries = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("line {}: expected `key = value`", lineno + 1));
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(format!("line {}: empty key", lineno + 1));
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }
        Ok(FileConfig { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }
}

/// Resolve one flag with the documented precedence. `matches` must have a
/// clap default for the arg so `get_one` is total.
pub fn resolve<T>(
    matches: &ArgMatches,
    config: &FileConfig,
    name: &str,
) -> Result<T, ConfigError>
where
    T: FromStr + Clone + Send + Sync + 'static,
    T::Err: std::fmt::Display,
{
    if matches.value_source(name) == Some(ValueSource::CommandLine) {
        return Ok(matches
            .get_one::<T>(name)
            .expect("explicit value present")
            .clone());
    }
    if let Some(raw) = config.get(name) {
        return raw
            .parse::<T>()
            .map_err(|e| ConfigError(format!("config key `{name}`: {e}")));
    }
    Ok(matches
        .get_one::<T>(name)
        .expect("clap default present")
        .clone())
}

/// Like `resolve`, for flags with no default (returns None when unset).
pub fn resolve_opt<T>(
    matches: &ArgMatches,
    config: &FileConfig,
    name: &str,
) -> Result<Option<T>, ConfigError>
where
    T: FromStr + Clone + Send + Sync + 'static,
    T::Err: std::fmt::Display,
{
    if matches.value_source(name) == Some(ValueSource::CommandLine) {
        return Ok(matches.get_one::<T>(name).cloned());
    }
    if let Some(raw) = config.get(name) {
        return raw
            .parse::<T>()
            .map(Some)
            .map_err(|e| ConfigError(format!("config key `{name}`: {e}")));
    }
    Ok(matches.get_one::<T>(name).cloned())
}

/// Seed precedence: CLI > config file > HBMO_SEED env > 0.
pub fn resolve_seed(matches: &ArgMatches, config: &FileConfig) -> Result<u64, ConfigError> {
    if matches.value_source("seed") == Some(ValueSource::CommandLine) {
        return Ok(*matches.get_one::<u64>("seed").expect("explicit seed"));
    }
    if let Some(raw) = config.get("seed") {
        return raw
            .parse::<u64>()
            .map_err(|e| ConfigError(format!("config key `seed`: {e}")));
    }
    if let Ok(raw) = std::env::var(SEED_ENV_VAR) {
        return raw
            .parse::<u64>()
            .map_err(|e| ConfigError(format!("{SEED_ENV_VAR}: {e}")));
    }
    Ok(*matches.get_one::<u64>("seed").expect("clap default seed"))
}
