//! Output plumbing: atomic writes, CSV assembly, and the resolved-config
//! echo.
//!
//! Every file lands via write-to-temp-then-rename in its final directory,
//! so readers never observe half-written artifacts and a crashed run
//! leaves no plausible-looking partial output. Floats are formatted with
//! Rust's shortest round-trip notation, which is deterministic, so equal
//! values always produce equal bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::Global;

/// Create a directory and any missing parents.
///
/// # Errors
///
/// Fails when the path exists as a non-directory or cannot be created.
pub fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)
        .with_context(|| format!("creating directory {}", path.display()))
}

/// Write bytes to `path` atomically (temp file + rename, same directory).
///
/// # Errors
///
/// Fails on any underlying filesystem error; the temp file is removed on
/// failure.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .with_context(|| format!("output path {} has no file name", path.display()))?;
    let mut tmp: PathBuf = dir.map(Path::to_path_buf).unwrap_or_default();
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    tmp.push(tmp_name);

    let write = || -> std::io::Result<()> {
        std::fs::write(&tmp, bytes)?;
        std::fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        anyhow::Error::new(e).context(format!("writing {}", path.display()))
    })
}

/// Serialize `value` as pretty JSON with a trailing newline, atomically.
///
/// # Errors
///
/// Fails on serialization or filesystem errors.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .with_context(|| format!("serializing {}", path.display()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Write a CSV file from a header line and preformatted rows, atomically.
///
/// # Errors
///
/// Fails on filesystem errors.
pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut text = String::with_capacity(header.len() + rows.iter().map(|r| r.len() + 1).sum::<usize>() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}

/// Format an optional float for a CSV cell; absent values become empty.
pub fn csv_opt_f64(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Quote a string for a CSV cell if it contains a separator or quote.
pub fn csv_escape(raw: &str) -> String {
    if raw.contains([',', '"', '\n']) {
        let mut quoted = String::with_capacity(raw.len() + 2);
        quoted.push('"');
        for ch in raw.chars() {
            if ch == '"' {
                quoted.push('"');
            }
            quoted.push(ch);
        }
        quoted.push('"');
        quoted
    } else {
        raw.to_string()
    }
}

#[derive(Serialize)]
struct Echo<'a, P: Serialize> {
    command: &'a str,
    seed: u64,
    out_dir: &'a Path,
    threads: usize,
    log_level: &'a str,
    /// Wall-clock time of the run; the only timestamp any command emits.
    unix_time: u64,
    params: &'a P,
}

/// Echo the fully resolved configuration beside a run's outputs.
///
/// The echo doubles as a config file: feeding it back through `--config`
/// reproduces the run. The `unix_time` field is the single timestamp in
/// any output and is ignored on input.
///
/// # Errors
///
/// Fails on serialization or filesystem errors.
pub fn write_resolved_config<P: Serialize>(
    dir: &Path,
    command: &str,
    global: &Global,
    params: &P,
) -> Result<()> {
    let unix_time = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let echo = Echo {
        command,
        seed: global.seed,
        out_dir: &global.out_dir,
        threads: global.threads,
        log_level: &global.log_level,
        unix_time,
        params,
    };
    write_json(&dir.join("resolved_config.json"), &echo)
}

/// Render a failure manifest (item id, error) as failures.csv.
///
/// # Errors
///
/// Fails on filesystem errors.
pub fn write_failures(dir: &Path, failures: &[(String, String)]) -> Result<()> {
    let rows: Vec<String> = failures
        .iter()
        .map(|(id, err)| {
            let mut row = String::new();
            let _ = write!(row, "{},{}", csv_escape(id), csv_escape(err));
            row
        })
        .collect();
    write_csv(&dir.join("failures.csv"), "item,error", &rows)
}
