//! Deterministic CSV and JSON writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::CliError;

/// 17 significant digits, exponent form.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV document: config-hash comment, header row, `\n` line endings.
pub fn csv(hash: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    writeln!(out, "# config_sha256={hash}").unwrap();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
