use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "UAVBEACON_OUT";
pub const DEFAULT_OUT_DIR: &str = "uavbeacon-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Output directory. Every file is written to a temporary sibling and renamed
/// into place, so readers never see a partial file.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    format: Format,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: PathBuf, format: Format) -> Result<Self, CliError> {
        fs::create_dir_all(&root).map_err(|e| CliError::io(format!("creating {}", root.display()), e))?;
        Ok(OutputDir { root, format, written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let target = self.root.join(name);
        let ctx = || format!("writing {}", target.display());
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root).map_err(|e| CliError::io(ctx(), e))?;
        tmp.write_all(bytes).map_err(|e| CliError::io(ctx(), e))?;
        tmp.as_file().sync_all().map_err(|e| CliError::io(ctx(), e))?;
        tmp.persist(&target).map_err(|e| CliError::io(ctx(), e.error))?;
        self.written.push(target.clone());
        Ok(target)
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("output types serialize");
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Rows as `<stem>.csv` with a header, or as a JSON array in `<stem>.json`.
    pub fn write_table<T: Serialize>(&mut self, stem: &str, rows: &[T]) -> Result<PathBuf, CliError> {
        match self.format {
            Format::Csv => {
                let bytes = to_csv(rows)?;
                self.write_bytes(&format!("{stem}.csv"), &bytes)
            }
            Format::Json => self.write_json(&format!("{stem}.json"), rows),
        }
    }
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Input(format!("csv encoding: {e}")))?;
    }
    w.into_inner().map_err(|e| CliError::io("csv buffer", e.into_error()))
}

/// Reads a headed CSV file into rows. Errors name the offending line.
pub fn read_csv<T: DeserializeOwned>(path: &Path, required: &[&str]) -> Result<Vec<T>, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(format!("opening {}", path.display()), e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("{}: unreadable header: {e}", path.display())))?
        .clone();
    let missing: Vec<&str> = required.iter().copied().filter(|c| !headers.iter().any(|h| h == *c)).collect();
    if !missing.is_empty() {
        return Err(CliError::Input(format!("{}: missing column(s) {}", path.display(), missing.join(", "))));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize().enumerate() {
        // line 1 is the header
        let line = i + 2;
        rows.push(rec.map_err(|e| CliError::Input(format!("{}: row at line {line}: {e}", path.display())))?);
    }
    Ok(rows)
}
