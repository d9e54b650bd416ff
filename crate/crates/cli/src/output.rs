use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, Context};
use sha2::{Digest, Sha256};
use slplab_core::{Detail, Report};

pub enum Outcome {
    Pass,
    Fail,
}

/// Usage errors exit 2, everything else 1. Neither writes a report.
#[derive(Debug)]
pub enum CliError {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(e) | CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

/// Errors raised by core while running a check. Bad inputs count as usage errors;
/// failures that depend on the numerics of a valid run do not.
impl From<slplab_core::Error> for CliError {
    fn from(e: slplab_core::Error) -> Self {
        use slplab_core::Error as E;
        match e {
            E::Diverged { .. } | E::DegenerateDensity(_) | E::NonFinite(_) | E::KernelNotInvariant { .. } => {
                CliError::Runtime(e.into())
            }
            other => CliError::Usage(other.into()),
        }
    }
}

pub fn usage(msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(anyhow!("{msg}"))
}

pub fn with_provenance(mut report: Report, config_json: &str, seed: u64) -> Report {
    let digest = Sha256::digest(config_json.as_bytes());
    let hash: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    let provenance = BTreeMap::from([
        ("config_hash".to_string(), Detail::Text(hash)),
        ("seed".to_string(), i64::try_from(seed).map_or(Detail::Text(seed.to_string()), Detail::Int)),
        ("tool_version".to_string(), Detail::Text(env!("CARGO_PKG_VERSION").to_string())),
    ]);
    report.insert("provenance", provenance);
    report
}

/// Validated, pretty JSON with a trailing newline; files are replaced atomically.
pub fn emit_report(report: &Report, path: Option<&Path>) -> Result<(), CliError> {
    report.validate().map_err(|e| CliError::Runtime(e.into()))?;
    let mut text = report.to_json_pretty().map_err(|e| CliError::Runtime(e.into()))?;
    text.push('\n');
    match path {
        Some(p) => write_atomic(p, text.as_bytes()).map_err(CliError::Runtime),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("writing report to stdout")
            .map_err(CliError::Runtime),
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| anyhow!("{}: not a file path", path.display()))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", path.display()))?;
    fs::rename(&tmp, path).with_context(|| {
        let _ = fs::remove_file(&tmp);
        format!("writing {}", path.display())
    })
}
