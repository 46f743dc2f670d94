//! Config-file loading and flag merging.
//!
//! Precedence is flags over config file over defaults. The config file is
//! the same shape as the `resolved_config.json` each run echoes, so a run
//! can be reproduced with `--config <echo>` and no other flags. The echo's
//! `unix_time` field is accepted and ignored on input; its `command` field
//! must match the command being run, which catches feeding one command's
//! echo to another.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::cli::GlobalFlags;

/// Fully resolved global settings.
#[derive(Debug, Clone)]
pub struct Global {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub threads: usize,
    pub log_level: String,
}

/// On-disk config shape; every field optional so partial files work.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub log_level: Option<String>,
    /// Present in echoed configs; ignored on input.
    pub unix_time: Option<u64>,
    pub params: Option<serde_json::Value>,
}

/// Parse a JSON config file, rejecting unknown keys.
///
/// # Errors
///
/// Fails on unreadable files and on JSON that does not match the echoed
/// config shape.
pub fn load_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let file: ConfigFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing config file {}", path.display()))?;
    Ok(file)
}

/// Reject a config file written by a different command.
///
/// # Errors
///
/// Fails when the file names a command other than `expected`.
pub fn check_command(file: &ConfigFile, expected: &str) -> Result<()> {
    if let Some(cmd) = &file.command {
        if cmd != expected {
            bail!("config file is for command {cmd:?}, not {expected:?}");
        }
    }
    Ok(())
}

/// Merge global flags with the config file and defaults.
pub fn resolve_global(flags: &GlobalFlags, file: Option<&ConfigFile>) -> Global {
    Global {
        seed: flags.seed.or(file.and_then(|f| f.seed)).unwrap_or(0),
        out_dir: flags
            .out_dir
            .clone()
            .or_else(|| file.and_then(|f| f.out_dir.clone()))
            .unwrap_or_else(|| PathBuf::from("out")),
        threads: flags.threads.or(file.and_then(|f| f.threads)).unwrap_or(0),
        log_level: flags
            .log_level
            .clone()
            .or_else(|| file.and_then(|f| f.log_level.clone()))
            .unwrap_or_else(|| "info".to_string()),
    }
}

/// Deserialize the command-specific params table, or defaults if absent.
///
/// # Errors
///
/// Fails when the params table does not match the command's schema.
pub fn command_params<T: DeserializeOwned + Default>(file: Option<&ConfigFile>) -> Result<T> {
    match file.and_then(|f| f.params.as_ref()) {
        Some(value) => {
            serde_json::from_value(value.clone()).context("parsing config params table")
        }
        None => Ok(T::default()),
    }
}

/// Parse an "auto or number" choice; `None` means auto.
///
/// # Errors
///
/// Fails on anything that is neither "auto" nor a positive integer.
pub fn parse_choice(raw: &str, what: &str) -> Result<Option<usize>> {
    if raw.eq_ignore_ascii_case("auto") {
        return Ok(None);
    }
    let value: usize = raw
        .parse()
        .with_context(|| format!("{what} must be \"auto\" or a positive integer, got {raw:?}"))?;
    if value == 0 {
        bail!("{what} must be at least 1, got 0");
    }
    Ok(Some(value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_flags() -> GlobalFlags {
        GlobalFlags {
            seed: None,
            out_dir: None,
            config: None,
            threads: None,
            log_level: None,
        }
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file: ConfigFile = serde_json::from_str(
            r#"{"command": "sample", "seed": 7, "out_dir": "from_file", "unix_time": 1}"#,
        )
        .unwrap();
        let mut flags = no_flags();
        flags.seed = Some(99);

        let g = resolve_global(&flags, Some(&file));
        assert_eq!(g.seed, 99);
        assert_eq!(g.out_dir, PathBuf::from("from_file"));
        assert_eq!(g.threads, 0);
        assert_eq!(g.log_level, "info");
    }

    #[test]
    fn defaults_apply_without_a_file() {
        let g = resolve_global(&no_flags(), None);
        assert_eq!(g.seed, 0);
        assert_eq!(g.out_dir, PathBuf::from("out"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<ConfigFile>(r#"{"sede": 7}"#);
        assert!(err.is_err());
    }

    #[test]
    fn command_mismatch_is_rejected() {
        let file: ConfigFile = serde_json::from_str(r#"{"command": "cluster"}"#).unwrap();
        assert!(check_command(&file, "cluster").is_ok());
        assert!(check_command(&file, "sample").is_err());
        assert!(check_command(&ConfigFile::default(), "sample").is_ok());
    }

    #[test]
    fn choice_parsing() {
        assert_eq!(parse_choice("auto", "d").unwrap(), None);
        assert_eq!(parse_choice("AUTO", "d").unwrap(), None);
        assert_eq!(parse_choice("4", "d").unwrap(), Some(4));
        assert!(parse_choice("0", "d").is_err());
        assert!(parse_choice("four", "d").is_err());
    }
}
