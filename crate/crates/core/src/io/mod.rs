//! File formats: score CSVs, fitted-model JSON, run-result tables, run
//! configuration TOML, and the report charts.
//!
//! Every writer goes through [`atomic_write`], so a crash mid-write never
//! leaves a truncated file behind, and parse errors are reported as
//! configuration problems while filesystem errors stay I/O problems.

pub mod charts;
pub mod model_file;
pub mod results;
pub mod run_config;
pub mod score_file;

pub use model_file::{load_model, model_from_json, model_to_json, save_model};
pub use run_config::RunConfig;
pub use score_file::{parse_score_csv, read_score_file, ScoreFile};

use crate::error::{CalibError, Result};
use std::fs;
use std::path::Path;

/// Write `bytes` to `path` through a temporary sibling and an atomic rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let name = path
        .file_name()
        .ok_or_else(|| CalibError::Io(format!("cannot write to '{}'", path.display())))?
        .to_string_lossy()
        .into_owned();
    let tmp_name = format!(".{name}.tmp-{}", std::process::id());
    let tmp = match dir {
        Some(d) => d.join(&tmp_name),
        None => Path::new(&tmp_name).to_path_buf(),
    };
    if let Err(e) = fs::write(&tmp, bytes) {
        return Err(CalibError::Io(format!("writing {}: {e}", tmp.display())));
    }
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(CalibError::Io(format!("renaming into {}: {e}", path.display())));
    }
    Ok(())
}

/// Read a whole text file, mapping failures to I/O errors with the path.
pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| CalibError::Io(format!("reading {}: {e}", path.display())))
}
