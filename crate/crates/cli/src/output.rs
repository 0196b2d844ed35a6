use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::{CliError, Result};

/// Twelve significant digits, lowercase scientific notation.
pub fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON number rounded to twelve significant digits; non-finite values
/// become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = fmt(x).parse().unwrap_or(x);
    json!(rounded)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| num(*x)).collect())
}

/// Collects the files of one run and writes the manifest last.
#[derive(Debug)]
pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::Writer::from_path(self.dir.join(name))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush().map_err(|source| CliError::Io {
            path: self.dir.join(name),
            source,
        })?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_json(&self, name: &str, value: &Value) -> Result<()> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).map_err(|source| CliError::Io { path, source })
    }

    pub fn json(&mut self, name: &str, value: &Value) -> Result<()> {
        self.write_json(name, value)?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// `manifest.json` holds everything reproducible; wall time and thread
    /// count go to `timing.json` so the manifest is byte-stable.
    pub fn finish(self, command: &str, params: Value, results: Value, wall_seconds: f64, threads: usize) -> Result<()> {
        let manifest = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "parameters": params,
            "results": results,
            "files": self.files,
        });
        self.write_json("manifest.json", &manifest)?;
        self.write_json(
            "timing.json",
            &json!({ "wall_seconds": num(wall_seconds), "threads": threads }),
        )
    }
}
