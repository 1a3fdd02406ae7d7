//! Layered option resolution: explicit flags beat config-file entries beat
//! built-in defaults. The config file is a plain `key = value` listing keyed
//! by the long option names; `#` starts a comment. Keys a subcommand does not
//! use are ignored so one file can serve several pipelines.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Parsed contents of a `key = value` config file.
#[derive(Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    /// Loads `path` when given; no `--config` means an empty layer.
    pub fn load(path: Option<&Path>) -> Result<Config, CliError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read config file {}: {e}", path.display()))
        })?;
        let mut entries = BTreeMap::new();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "config line {} is not `key = value`: `{raw}`",
                    index + 1
                )));
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::Usage(format!("config line {} has an empty key", index + 1)));
            }
            entries.insert(key.to_owned(), value.trim().to_owned());
        }
        Ok(Config { entries })
    }

    /// The flag when given, else the config entry, else the default.
    pub fn resolve<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.resolve_opt(flag, key)?.unwrap_or(default))
    }

    /// The flag when given, else the config entry, for options with no default.
    pub fn resolve_opt<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|e| {
                CliError::Usage(format!("config key `{key}`: cannot parse `{raw}`: {e}"))
            }),
        }
    }
}
