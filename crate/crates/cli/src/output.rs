//! Artifact paths and writers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{CliError, RunConfig};

/// Where a run writes: a directory, or a single JSON file for `partition`.
#[derive(Debug, Clone)]
pub struct OutputTarget {
    pub dir: PathBuf,
    pub file: Option<PathBuf>,
}

impl OutputTarget {
    pub fn new(out: &Path, allow_file: bool) -> Result<Self, CliError> {
        let is_file = allow_file && out.extension().is_some_and(|e| e == "json");
        let dir = if is_file {
            match out.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            }
        } else {
            out.to_path_buf()
        };
        fs::create_dir_all(&dir)
            .map_err(|e| CliError::Usage(format!("output directory {} is not writable: {e}", dir.display())))?;
        Ok(Self {
            dir,
            file: is_file.then(|| out.to_path_buf()),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes the resolved config next to the outputs.
    pub fn echo_config(&self, cfg: &RunConfig) -> Result<PathBuf, CliError> {
        let name = match &self.file {
            Some(f) => format!("{}.config.json", f.file_stem().unwrap_or_default().to_string_lossy()),
            None => format!("{}.config.json", cfg.command.as_deref().unwrap_or("run")),
        };
        let path = self.path(&name);
        write_json(&path, cfg)?;
        Ok(path)
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let fail = |e: csv::Error| CliError::Failed(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(fail)?;
    for r in rows {
        w.serialize(r).map_err(fail)?;
    }
    w.flush()?;
    Ok(())
}

/// File-name tag for δ: `2^-k` for exact powers of two, else the decimal value.
pub fn delta_tag(delta: f64) -> String {
    let k = -delta.log2();
    if k.fract() == 0.0 && f64::powi(2.0, -(k as i32)) == delta {
        format!("2^-{k}")
    } else {
        format!("{delta}")
    }
}
