use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use mtweight::WeightParams;

pub const OUT_DIR_VAR: &str = "MTWEIGHT_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Violation(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Violation(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Violation(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<mtweight::Error> for CliError {
    fn from(e: mtweight::Error) -> Self {
        use mtweight::Error::*;
        match e {
            Domain(_) | Precondition(_) | Parse(_) => CliError::Usage(e.to_string()),
            Numeric { .. } | Overflow { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Option<WeightParams>,
    /// SHA-256 of the fully resolved command and flags.
    pub config_digest: String,
    pub tool_version: String,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new<C: Serialize>(
        command: &str,
        params: Option<WeightParams>,
        resolved: &C,
        wall_time_s: f64,
        outputs: Vec<String>,
    ) -> Self {
        let canonical = serde_json::to_string(resolved).expect("serializable flags");
        let digest = Sha256::digest(canonical.as_bytes());
        Self {
            command: command.to_string(),
            params,
            config_digest: digest.iter().map(|b| format!("{b:02x}")).collect(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s,
            outputs,
        }
    }
}

/// Tracks files written by a run. The primary output goes to `--out` or,
/// without it, to stdout.
pub struct Outputs {
    dir: Option<PathBuf>,
    written: Vec<String>,
    primary: Option<PathBuf>,
    summaries: Vec<String>,
}

impl Outputs {
    pub fn from_env() -> Self {
        Self {
            dir: std::env::var_os(OUT_DIR_VAR).map(PathBuf::from),
            written: Vec::new(),
            primary: None,
            summaries: Vec::new(),
        }
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn write_file(&mut self, p: &Path, text: &str) -> Result<PathBuf, CliError> {
        let path = self.resolve(p);
        if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| CliError::Usage(format!("{}: {e}", parent.display())))?;
        }
        fs::write(&path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        self.written.push(path.display().to_string());
        Ok(path)
    }

    pub fn emit(&mut self, out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
        match out {
            Some(p) => {
                let path = self.write_file(p, text)?;
                self.primary = Some(path);
            }
            None => {
                let mut so = std::io::stdout().lock();
                so.write_all(text.as_bytes())
                    .map_err(|e| CliError::Usage(format!("stdout: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn summary(&mut self, line: String) {
        self.summaries.push(line);
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// Prints summaries and the manifest to stderr, and writes the manifest
    /// next to the primary output file.
    pub fn finish(&self, manifest: &RunManifest) {
        for s in &self.summaries {
            eprintln!("{s}");
        }
        let text = serde_json::to_string_pretty(manifest).expect("serializable manifest");
        eprintln!("{text}");
        if let Some(p) = &self.primary {
            let mp = with_suffix(p, ".manifest.json");
            if let Err(e) = fs::write(&mp, format!("{text}\n")) {
                eprintln!("warning: could not write {}: {e}", mp.display());
            }
        }
    }
}

pub fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
