//! Report plumbing shared by the subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Bumped whenever a report layout changes incompatibly.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// One named pass/fail check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

/// Prints one line per check, then the files written.
pub fn print_summary(command: &str, checks: &[Check], files: &[PathBuf]) {
    for c in checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {command}/{}: {}", c.name, c.detail);
    }
    for f in files {
        println!("wrote {}", f.display());
    }
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> std::io::Result<PathBuf> {
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(path)
}

/// Creates `dir/name` and hands a buffered writer to `fill`.
pub fn write_with<F, E>(dir: &Path, name: &str, fill: F) -> anyhow::Result<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), E>,
    E: Into<anyhow::Error>,
{
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    fill(&mut w).map_err(Into::into)?;
    w.flush()?;
    Ok(path)
}

pub fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}
