//! Minimal schema-stable CSV output: one header line, 12 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

/// Locale-free scientific notation with 12 significant digits.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.11e}")
    }
}

/// Commas and quotes would break the fixed column count.
pub fn text(s: &str) -> String {
    s.replace([',', '"', '\n'], ";")
}

pub struct CsvWriter {
    out: BufWriter<File>,
    columns: usize,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{}", header.join(","))?;
        Ok(CsvWriter { out, columns: header.len() })
    }

    /// A label column followed by numbers.
    pub fn row(&mut self, label: &str, values: &[f64]) -> Result<()> {
        self.raw_row(&[text(label)], values, &[])
    }

    pub fn raw_row(&mut self, lead: &[String], values: &[f64], tail: &[String]) -> Result<()> {
        let cells: Vec<String> =
            lead.iter().cloned().chain(values.iter().map(|&v| num(v))).chain(tail.iter().cloned()).collect();
        debug_assert_eq!(cells.len(), self.columns);
        writeln!(self.out, "{}", cells.join(","))?;
        Ok(())
    }

    pub fn text_row(&mut self, cells: &[String]) -> Result<()> {
        let cells: Vec<String> = cells.iter().map(|c| text(c)).collect();
        debug_assert_eq!(cells.len(), self.columns);
        writeln!(self.out, "{}", cells.join(","))?;
        Ok(())
    }

    /// Marker row `FAILED,<value>,,...`, flushed so the partial file is usable.
    pub fn failure(&mut self, value: f64) -> Result<()> {
        let mut cells = vec!["FAILED".to_string(), num(value)];
        cells.resize(self.columns, String::new());
        writeln!(self.out, "{}", cells.join(","))?;
        self.out.flush()?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.5), "5.00000000000e-1");
        assert_eq!(num(-1234.5), "-1.23450000000e3");
        assert_eq!(num(f64::NAN), "NaN");
        let back: f64 = num(std::f64::consts::PI).parse().unwrap();
        assert!((back - std::f64::consts::PI).abs() < 1e-11);
    }
}
