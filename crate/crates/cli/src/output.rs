//! Plain numeric tables and JSON documents with provenance.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::CliError;

/// Identifies the run that produced an artifact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub config_hash: u64,
    pub seed: u64,
}

impl Provenance {
    pub const VERSION: &'static str = env!("CARGO_PKG_VERSION");

    pub fn hash_hex(&self) -> String {
        format!("{:016x}", self.config_hash)
    }

    pub fn json(&self) -> Value {
        json!({
            "tool": "h2asym",
            "version": Self::VERSION,
            "config_hash": self.hash_hex(),
            "seed": self.seed,
        })
    }

    fn comment(&self) -> String {
        format!(
            "# h2asym {} config_hash={} seed={}",
            Self::VERSION,
            self.hash_hex(),
            self.seed
        )
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write a table: one provenance comment, one header line, then rows.
pub fn write_table(
    path: &Path,
    prov: &Provenance,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let body = || -> std::io::Result<()> {
        writeln!(w, "{}", prov.comment())?;
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()
    };
    body().map_err(io_err(path))
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("json values serialize");
    fs::write(path, text + "\n").map_err(io_err(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(io_err(path))
}

/// A numeric table read back from [`write_table`] output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub path: PathBuf,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let bad = |line: usize, message: String| {
            CliError::Data(format!("{}:{line}: {message}", path.display()))
        };
        let mut header: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cells = line.split(',').map(str::trim);
            match &header {
                None => header = Some(cells.map(String::from).collect()),
                Some(h) => {
                    let row = cells
                        .map(|c| c.parse::<f64>().map_err(|e| bad(i + 1, format!("{c:?}: {e}"))))
                        .collect::<Result<Vec<f64>, _>>()?;
                    if row.len() != h.len() {
                        return Err(bad(i + 1, format!("{} cells, header has {}", row.len(), h.len())));
                    }
                    rows.push(row);
                }
            }
        }
        let header = header.ok_or_else(|| bad(0, "no header line".into()))?;
        Ok(Self {
            path: path.to_path_buf(),
            header,
            rows,
        })
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> Result<usize, CliError> {
        self.header.iter().position(|h| h == name).ok_or_else(|| {
            CliError::Data(format!("{}: missing column {name:?}", self.path.display()))
        })
    }
}
