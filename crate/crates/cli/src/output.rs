//! Deterministic CSV and JSON writers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// A float with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("cannot create {}", root.display()))?;
        Ok(OutDir {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf> {
        let p = self.path(name);
        fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// CSV with a header row; cells are written as given.
    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let mut text = header.join(",");
        text.push('\n');
        for row in rows {
            let _ = writeln!(text, "{}", row.join(","));
        }
        self.write_text(name, &text)
    }

    /// CSV of numeric columns.
    pub fn write_columns(
        &self,
        name: &str,
        header: &[&str],
        columns: &[&[f64]],
    ) -> Result<PathBuf> {
        let len = columns.iter().map(|c| c.len()).min().unwrap_or(0);
        let rows: Vec<Vec<String>> = (0..len)
            .map(|i| columns.iter().map(|c| num(c[i])).collect())
            .collect();
        self.write_csv(name, header, &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
        assert_eq!(opt(None), "");
    }
}
