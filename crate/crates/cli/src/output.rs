//! Fixed-precision CSV emission.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

pub struct CsvOut {
    inner: BufWriter<File>,
    precision: usize,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[&str], precision: usize) -> Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = CsvOut { inner: BufWriter::new(file), precision };
        writeln!(out.inner, "{}", header.join(","))?;
        Ok(out)
    }

    pub fn num(&self, x: f64) -> String {
        format_float(x, self.precision)
    }

    pub fn row(&mut self, cells: &[String]) -> Result<()> {
        writeln!(self.inner, "{}", cells.join(","))?;
        Ok(())
    }

    pub fn nums(&mut self, xs: &[f64]) -> Result<()> {
        let cells: Vec<String> = xs.iter().map(|&x| self.num(x)).collect();
        self.row(&cells)
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Scientific notation with `digits` significant digits; `-0` prints as `0`.
pub fn format_float(x: f64, digits: usize) -> String {
    if x.is_finite() {
        format!("{:.*e}", digits.saturating_sub(1), x + 0.0)
    } else {
        x.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 0.0] {
            let s = format_float(x, 17);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(format_float(1.5, 3), "1.50e0");
        assert_eq!(format_float(-0.0, 3), "0.00e0");
    }
}
