//! Output files. Each one starts with the same provenance header: comment
//! lines for CSV, a `header` object for JSON.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub program: &'static str,
    pub version: &'static str,
    pub command: String,
    /// SHA-256 of the config file bytes.
    pub config_sha256: String,
    pub units: String,
    pub seed: Option<u64>,
    pub regime: Regime,
}

/// `Omega R / c` and the rotor adiabaticity `|dOmega/dt| / Omega^2`, when
/// they are defined for the scenario.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Regime {
    #[serde(rename = "OmegaR_over_c")]
    pub omega_r: Option<f64>,
    pub adiabaticity: Option<f64>,
    pub warnings: Vec<String>,
}

pub fn config_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |x| format!("{x:e}"))
}

impl Header {
    pub fn csv_lines(&self) -> String {
        let mut s = format!("# {} {}\n", self.program, self.version);
        s.push_str(&format!("# command: {}\n", self.command));
        s.push_str(&format!("# config_sha256: {}\n", self.config_sha256));
        s.push_str(&format!("# units: {}\n", self.units));
        if let Some(seed) = self.seed {
            s.push_str(&format!("# seed: {seed}\n"));
        }
        s.push_str(&format!("# OmegaR_over_c: {}\n", opt(self.regime.omega_r)));
        s.push_str(&format!("# adiabaticity: {}\n", opt(self.regime.adiabaticity)));
        for w in &self.regime.warnings {
            s.push_str(&format!("# warning: {w}\n"));
        }
        s
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    header: &'a Header,
    result: &'a T,
}

pub struct Writer {
    pub dir: PathBuf,
    pub header: Header,
    pub written: Vec<PathBuf>,
}

impl Writer {
    pub fn new(dir: &Path, header: Header) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), header, written: Vec::new() })
    }

    /// Writes `body` (CSV text starting with its column line) under the header.
    pub fn csv(&mut self, name: &str, body: &str) -> io::Result<()> {
        let path = self.dir.join(format!("{name}.csv"));
        fs::write(&path, self.header.csv_lines() + body)?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, result: &T) -> io::Result<()> {
        let path = self.dir.join(format!("{name}.json"));
        let mut text = serde_json::to_string_pretty(&Document { header: &self.header, result })
            .map_err(io::Error::other)?;
        text.push('\n');
        fs::write(&path, text)?;
        self.written.push(path);
        Ok(())
    }
}

/// CSV of `(key, value)` rows for scalar results.
pub fn key_value_csv(rows: &[(&str, f64)]) -> String {
    let mut s = String::from("quantity,value\n");
    for (k, v) in rows {
        s.push_str(&format!("{k},{v:e}\n"));
    }
    s
}
