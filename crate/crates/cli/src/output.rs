use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use coalnet::Error;
use serde::Serialize;

use crate::{EXIT_CONFIG, EXIT_INVARIANT};

/// Provenance written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: String,
    pub seed: Option<u64>,
    pub output: String,
    pub version: &'static str,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes rows as CSV to `out` (or stdout) and the manifest next to a file.
pub fn emit(
    out: Option<&Path>,
    header: &[&str],
    rows: &[Vec<String>],
    command: &str,
    config: &str,
    seed: Option<u64>,
) -> Result<()> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;

    if let Some(path) = out {
        let manifest = RunManifest {
            command: command.to_string(),
            config: config.to_string(),
            seed,
            output: path.display().to_string(),
            version: env!("CARGO_PKG_VERSION"),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let mpath = manifest_path(path);
        let text = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(&mpath, text + "\n")
            .with_context(|| format!("writing {}", mpath.display()))?;
    }
    Ok(())
}

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::Config(_) | Error::Parse(_) | Error::Geometry(_) | Error::ZeroSlots) => {
            EXIT_CONFIG
        }
        Some(Error::InvariantBreach(_)) => EXIT_INVARIANT,
        Some(Error::InvalidStructure(_)) => 2,
        _ => 1,
    }
}
