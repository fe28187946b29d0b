//! Deterministic number formatting, run headers and output files that are
//! removed again if the run fails.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Scientific notation with `precision` significant digits; `-0` prints as `0`.
pub fn fmt_num(x: f64, precision: usize) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{:.*e}", precision.saturating_sub(1), x)
}

pub fn config_hash(cfg: &RunConfig) -> String {
    let digest = Sha256::digest(cfg.serialize().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Version, command, seed and config hash, one `# key=value` per line.
pub fn run_header(cfg: &RunConfig, command: &str) -> String {
    format!(
        "# qreg {VERSION}\n# command={command}\n# seed={}\n# config_sha256={}\n",
        cfg.geometry.seed,
        config_hash(cfg)
    )
}

/// Run header followed by the resolved configuration as comments.
pub fn file_header(cfg: &RunConfig, command: &str) -> String {
    let mut h = run_header(cfg, command);
    for line in cfg.serialize().lines() {
        if line.is_empty() {
            h.push_str("#\n");
        } else {
            h.push_str("# ");
            h.push_str(line);
            h.push('\n');
        }
    }
    h
}

/// Files written by one run.
pub struct Artifacts {
    dir: PathBuf,
    header: String,
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path, header: String) -> Self {
        Self {
            dir: dir.to_path_buf(),
            header,
            written: Vec::new(),
        }
    }

    pub fn write(&mut self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        let path = self.dir.join(name);
        self.written.push(path.clone());
        fs::write(&path, format!("{}{}", self.header, body)).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.written
    }

    /// Removes everything written so far.
    pub fn discard(&mut self) {
        for p in self.written.drain(..) {
            let _ = fs::remove_file(p);
        }
    }
}
