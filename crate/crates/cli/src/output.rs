use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

use crate::args::Format;

pub struct Output {
    pub dir: PathBuf,
    pub format: Format,
}

impl Output {
    pub fn new(dir: PathBuf, format: Format) -> Result<Self> {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Output { dir, format })
    }

    pub fn write(&self, name: &str, content: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, content).with_context(|| format!("writing {}", path.display()))
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<String> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, &s)?;
        Ok(s)
    }

    /// Write `<stem>.json` (and `<stem>.csv` when given) and print the summary
    /// in the requested format.
    pub fn report<T: Serialize>(&self, stem: &str, value: &T, csv: Option<String>) -> Result<()> {
        let js = self.json(&format!("{stem}.json"), value)?;
        if let Some(c) = &csv {
            self.write(&format!("{stem}.csv"), c)?;
        }
        match (self.format, csv) {
            (Format::Csv, Some(c)) => print!("{c}"),
            _ => print!("{js}"),
        }
        Ok(())
    }
}

/// Marker for errors in the input data (exit status 65).
#[derive(Debug)]
pub struct DataError(pub String);

impl std::fmt::Display for DataError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for DataError {}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).map_err(|e| DataError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| DataError(format!("{}: {e}", path.display())).into())
}

/// `a:b:n` to `n` evenly spaced values from `a` to `b`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || DataError(format!("grid `{s}` is not of the form a:b:n"));
    if parts.len() != 3 {
        return Err(bad().into());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let n: usize = parts[2].parse().map_err(|_| bad())?;
    Ok(match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    })
}
