//! Run directories: lockfile, output files, checkpoints and the manifest.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::tables::{write_table, NumericTable, SeriesTables, Table};
use crate::mps::{read_checkpoint, write_checkpoint, AnyMps};
use crate::quench::{ObservableSeries, ResumePoint};
use crate::{Error, Result};

const LOCK_FILE: &str = ".lock";
const MANIFEST_FILE: &str = "manifest.json";
const STATE_FILE: &str = "checkpoint.qmps";
const CURSOR_FILE: &str = "checkpoint.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostInfo {
    pub os: String,
    pub arch: String,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub command: String,
    pub code_version: String,
    pub host: HostInfo,
    pub config: BTreeMap<String, String>,
    pub tq_convention: String,
    pub wall_time_s: f64,
    pub converged: BTreeMap<String, bool>,
    pub summary: serde_json::Value,
    pub files: Vec<FileEntry>,
}

/// Exclusive handle on a run directory. The lockfile is removed on drop.
pub struct RunDir {
    path: PathBuf,
    started: Instant,
    command: String,
    converged: BTreeMap<String, bool>,
}

pub const TQ_CONVENTION: &str =
    "tq = max|x|/v with x = col - (Lx-1)/2; uniform quench (v = inf) ends at +2 tau; t0 = -2 tau";

impl RunDir {
    /// Create (or reopen) `path` and take its lock.
    pub fn create(path: &Path, command: &str) -> Result<Self> {
        fs::create_dir_all(path)?;
        let lock = path.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => writeln!(f, "{}", std::process::id())?,
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                return Err(Error::Resource(format!("run directory {} is locked by another writer", path.display())))
            }
            Err(e) => return Err(e.into()),
        }
        Ok(Self { path: path.to_path_buf(), started: Instant::now(), command: command.into(), converged: BTreeMap::new() })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn mark_converged(&mut self, what: &str, ok: bool) {
        self.converged.insert(what.into(), ok);
    }

    pub fn write_table<T: Table>(&self, rows: &[T], source: &str) -> Result<()> {
        let f = BufWriter::new(File::create(self.file(T::FILE))?);
        write_table(f, rows, source)
    }

    pub fn write_numeric(&self, name: &str, table: &NumericTable, source: &str) -> Result<()> {
        table.write(BufWriter::new(File::create(self.file(name))?), source)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        fs::write(self.file(name), text)?;
        Ok(())
    }

    /// energy, local_energy, correlations, entropy and truncation tables.
    pub fn write_series(&self, series: &ObservableSeries) -> Result<()> {
        let t = SeriesTables::from(series);
        self.write_table(&t.energy, &series.source)?;
        self.write_table(&t.local, &series.source)?;
        self.write_table(&t.correlations, &series.source)?;
        self.write_table(&t.entropy, &series.source)?;
        self.write_table(&t.truncation, &series.source)
    }

    /// Save the state and the series so far; atomically replaces the
    /// previous checkpoint.
    pub fn write_checkpoint(&self, point: &ResumePoint) -> Result<()> {
        let tmp_state = self.file("checkpoint.qmps.tmp");
        let tmp_cursor = self.file("checkpoint.json.tmp");
        write_checkpoint(BufWriter::new(File::create(&tmp_state)?), &AnyMps::Complex(point.state.clone()))?;
        let cursor = Cursor { t: point.t, series: point.series.clone() };
        serde_json::to_writer(BufWriter::new(File::create(&tmp_cursor)?), &cursor)?;
        fs::rename(tmp_state, self.file(STATE_FILE))?;
        fs::rename(tmp_cursor, self.file(CURSOR_FILE))?;
        Ok(())
    }

    /// The last checkpoint, if any.
    pub fn read_checkpoint(&self) -> Result<Option<ResumePoint>> {
        let (state_path, cursor_path) = (self.file(STATE_FILE), self.file(CURSOR_FILE));
        if !state_path.exists() || !cursor_path.exists() {
            return Ok(None);
        }
        let state = read_checkpoint(BufReader::new(File::open(state_path)?))?.into_complex();
        let cursor: Cursor = serde_json::from_reader(BufReader::new(File::open(cursor_path)?))?;
        Ok(Some(ResumePoint { state, t: cursor.t, series: cursor.series }))
    }

    /// Write the manifest listing every file in the directory with its
    /// checksum.
    pub fn finish(self, config: BTreeMap<String, String>, threads: usize, summary: serde_json::Value) -> Result<RunManifest> {
        let mut files = Vec::new();
        let mut names: Vec<String> = fs::read_dir(&self.path)?
            .filter_map(|e| e.ok())
            .filter(|e| e.file_type().map(|t| t.is_file()).unwrap_or(false))
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|n| n != LOCK_FILE && n != MANIFEST_FILE && !n.ends_with(".tmp"))
            .collect();
        names.sort();
        for name in names {
            files.push(file_entry(&self.path, &name)?);
        }
        let manifest = RunManifest {
            schema: super::tables::SCHEMA_VERSION,
            command: self.command.clone(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            host: HostInfo { os: std::env::consts::OS.into(), arch: std::env::consts::ARCH.into(), threads },
            config,
            tq_convention: TQ_CONVENTION.into(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
            converged: self.converged.clone(),
            summary,
            files,
        };
        let f = BufWriter::new(File::create(self.file(MANIFEST_FILE))?);
        serde_json::to_writer_pretty(f, &manifest)?;
        Ok(manifest)
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(self.path.join(LOCK_FILE));
    }
}

#[derive(Serialize, Deserialize)]
struct Cursor {
    t: f64,
    series: ObservableSeries,
}

fn file_entry(dir: &Path, name: &str) -> Result<FileEntry> {
    let bytes = fs::read(dir.join(name))?;
    Ok(FileEntry { name: name.into(), sha256: hex::encode(Sha256::digest(&bytes)), bytes: bytes.len() as u64 })
}

/// Read a manifest and check every listed checksum.
pub fn verify_manifest(dir: &Path) -> Result<RunManifest> {
    let manifest: RunManifest = serde_json::from_reader(BufReader::new(File::open(dir.join(MANIFEST_FILE))?))?;
    for entry in &manifest.files {
        let now = file_entry(dir, &entry.name)?;
        if now != *entry {
            return Err(Error::InvalidInput(format!("checksum mismatch for {}", entry.name)));
        }
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::tables::EnergyRow;

    #[test]
    fn lock_is_exclusive_and_released() {
        let dir = tempfile::tempdir().unwrap();
        let run = RunDir::create(dir.path(), "test").unwrap();
        assert!(matches!(RunDir::create(dir.path(), "test"), Err(Error::Resource(_))));
        drop(run);
        assert!(RunDir::create(dir.path(), "test").is_ok());
    }

    #[test]
    fn manifest_lists_files_with_checksums() {
        let dir = tempfile::tempdir().unwrap();
        let run = RunDir::create(dir.path(), "test").unwrap();
        run.write_table(&[EnergyRow { t: 0.0, energy: -1.0, e0: -1.5, eps: 0.25 }], "mps").unwrap();
        run.write_text("notes.txt", "hello").unwrap();
        let m = run.finish(BTreeMap::new(), 1, serde_json::json!({})).unwrap();
        let names: Vec<&str> = m.files.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["energy.csv", "notes.txt"]);
        verify_manifest(dir.path()).unwrap();
        fs::write(dir.path().join("notes.txt"), "changed").unwrap();
        assert!(verify_manifest(dir.path()).is_err());
        assert!(!dir.path().join(LOCK_FILE).exists());
    }
}
