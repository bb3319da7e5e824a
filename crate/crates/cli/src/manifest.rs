//! Per-command provenance: resolved config plus content hashes of every
//! input and output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Settings;

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: &'a Settings,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

/// Write `<command>.config.toml` and `<command>.manifest.json` into `dir`.
pub fn write(dir: &Path, command: &str, settings: &Settings, inputs: &[PathBuf], outputs: &[PathBuf]) -> anyhow::Result<()> {
    let hashes = |paths: &[PathBuf]| -> anyhow::Result<BTreeMap<String, String>> {
        paths.iter().map(|p| Ok((p.display().to_string(), sha256_file(p)?))).collect()
    };
    std::fs::write(dir.join(format!("{command}.config.toml")), settings.to_toml())?;
    let m = Manifest { command, config: settings, inputs: hashes(inputs)?, outputs: hashes(outputs)? };
    std::fs::write(dir.join(format!("{command}.manifest.json")), serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(())
}
