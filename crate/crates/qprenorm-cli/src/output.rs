//! Artifact writer: CSV and JSON files with checksums collected into `manifest.json`.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::hex;
use crate::error::CliError;

/// 17 significant digits, enough to round-trip any double.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| CliError::Io { path: "csv buffer".into(), source: e.into_error() })
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub struct Artifacts {
    dir: Option<PathBuf>,
    config_hash: String,
    plot_data: bool,
    started: u64,
    files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn new(dir: Option<&Path>, config_hash: &str, plot_data: bool) -> Result<Self, CliError> {
        if let Some(d) = dir {
            std::fs::create_dir_all(d).map_err(|source| CliError::Io { path: d.display().to_string(), source })?;
        }
        Ok(Artifacts {
            dir: dir.map(Path::to_path_buf),
            config_hash: config_hash.to_string(),
            plot_data,
            started: unix_now(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        self.files.push((name.to_string(), hex(&Sha256::digest(bytes))));
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let bytes = csv_bytes(header, rows)?;
        self.write(name, &bytes)
    }

    /// Writes `value` with the config hash added under `config_hash`.
    pub fn json(&mut self, name: &str, mut value: Value) -> Result<(), CliError> {
        if let Value::Object(m) = &mut value {
            m.insert("config_hash".into(), Value::String(self.config_hash.clone()));
        } else {
            value = json!({ "config_hash": self.config_hash, "report": value });
        }
        let mut text = serde_json::to_string_pretty(&value).expect("json values serialize");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Two whitespace-separated columns, only with `--plot-data`.
    pub fn plot(&mut self, name: &str, points: &[(f64, f64)]) -> Result<(), CliError> {
        if !self.plot_data {
            return Ok(());
        }
        let text: String = points.iter().map(|&(x, y)| format!("{} {}\n", fmt17(x), fmt17(y))).collect();
        self.write(name, text.as_bytes())
    }

    pub fn finish(self, command: &str) -> Result<(), CliError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let manifest = json!({
            "command": command,
            "config_hash": self.config_hash,
            "code_version": env!("CARGO_PKG_VERSION"),
            "started_unix": self.started,
            "finished_unix": unix_now(),
            "artifacts": self.files.iter().map(|(f, s)| json!({ "file": f, "sha256": s })).collect::<Vec<_>>(),
        });
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest).expect("json values serialize");
        text.push('\n');
        std::fs::write(&path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
    }
}
