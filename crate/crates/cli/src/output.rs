//! CSV and JSON writers. Floats in CSV carry 17 significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub fn float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.path(name), text)?;
        Ok(())
    }

    /// Writes a header and rows of already formatted cells.
    pub fn csv(&self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, -std::f64::consts::PI, 1e-300, 4.0 * std::f64::consts::PI / 3.0] {
            let s = float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            assert_eq!(s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
        assert_eq!(float(f64::NAN), "");
    }
}
