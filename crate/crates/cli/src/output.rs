//! Run artifacts: CSV tables and the JSON manifest that describes them.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const CSV_FORMAT: u32 = 1;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// An in-memory CSV table, written once complete.
pub struct Table {
    pub name: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, csv::Error> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
    }
}

/// Shortest round-trip form (exponent for very small or large values).
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub file: String,
    pub sha256: String,
    #[serde(default)]
    pub rows: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: Vec<String>,
    pub config_path: Option<String>,
    pub config_sha256: String,
    /// The configuration text, verbatim.
    pub config_toml: String,
    pub seed: u64,
    pub overrides: Overrides,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub csv_format: u32,
    pub operations: Vec<serde_json::Value>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Artifacts cut short by a budget.
    pub partial: Vec<String>,
}

/// Collects artifacts for one run, then writes them with the manifest.
pub struct Run {
    pub out: PathBuf,
    pub manifest: RunManifest,
    tables: Vec<Table>,
    json: Vec<(String, serde_json::Value)>,
}

impl Run {
    pub fn new(out: PathBuf, manifest: RunManifest) -> Self {
        Run { out, manifest, tables: Vec::new(), json: Vec::new() }
    }

    pub fn table(&mut self, t: Table) {
        self.tables.push(t);
    }

    /// Registers an empty table and returns its handle for `push`.
    pub fn add_table(&mut self, name: &str, header: &[&str]) -> usize {
        self.tables.push(Table::new(name, header));
        self.tables.len() - 1
    }

    pub fn push(&mut self, table: usize, row: Vec<String>) {
        self.tables[table].push(row);
    }

    pub fn json(&mut self, name: &str, v: serde_json::Value) {
        self.json.push((name.into(), v));
    }

    pub fn operation(&mut self, v: serde_json::Value) {
        self.manifest.operations.push(v);
    }

    pub fn partial(&mut self, what: String) {
        self.manifest.partial.push(what);
    }

    pub fn finish(mut self) -> std::io::Result<PathBuf> {
        fs::create_dir_all(&self.out)?;
        for t in &self.tables {
            let bytes = t.to_bytes().map_err(std::io::Error::other)?;
            let file = format!("{}.csv", t.name);
            fs::write(self.out.join(&file), &bytes)?;
            self.manifest.outputs.push(FileDigest { file, sha256: sha256_hex(&bytes), rows: Some(t.len()) });
        }
        for (name, v) in &self.json {
            let mut bytes = serde_json::to_vec_pretty(v).map_err(std::io::Error::other)?;
            bytes.push(b'\n');
            let file = format!("{name}.json");
            fs::write(self.out.join(&file), &bytes)?;
            self.manifest.outputs.push(FileDigest { file, sha256: sha256_hex(&bytes), rows: None });
        }
        self.manifest.finished_unix = unix_now();
        let path = self.out.join("manifest.json");
        let mut bytes = serde_json::to_vec_pretty(&self.manifest).map_err(std::io::Error::other)?;
        bytes.push(b'\n');
        fs::write(&path, bytes)?;
        Ok(path)
    }
}

pub fn read_digest(path: &Path) -> std::io::Result<FileDigest> {
    let bytes = fs::read(path)?;
    Ok(FileDigest { file: path.display().to_string(), sha256: sha256_hex(&bytes), rows: None })
}
