//! Output directory bookkeeping and the `manifest.json` written by every run.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use rnls::output::to_json;
use rnls::{snapshot, Field, Grid};

pub const MANIFEST: &str = "manifest.json";

/// Writes files into one directory and remembers their names.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self { dir, written: Vec::new() })
    }

    fn record(&mut self, name: &str) -> PathBuf {
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_owned());
        }
        self.dir.join(name)
    }

    pub fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.record(name);
        std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
    }

    pub fn snapshot(&mut self, name: &str, field: &Field<f64>) -> rnls::Result<()> {
        let path = self.record(name);
        snapshot::save(field, path)
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }
}

#[derive(Serialize)]
pub struct GridInfo {
    pub d: usize,
    pub k: usize,
    pub dims: Vec<usize>,
    pub lengths: Vec<f64>,
}

impl GridInfo {
    pub fn of(grid: &Grid<f64>) -> Self {
        let spec = grid.spec();
        Self { d: spec.d(), k: spec.k(), dims: spec.dims().to_vec(), lengths: spec.lengths().to_vec() }
    }
}

#[derive(Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub format: &'static str,
    pub subcommand: &'static str,
    pub params: Value,
    pub grid: Option<GridInfo>,
    pub seeds: Vec<u64>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<String>,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl Manifest {
    pub fn start(subcommand: &'static str) -> Self {
        Self {
            tool: "rnls",
            version: rnls::VERSION,
            format: snapshot::FORMAT_NAME,
            subcommand,
            params: Value::Null,
            grid: None,
            seeds: Vec::new(),
            started_unix: now(),
            finished_unix: 0.0,
            outputs: Vec::new(),
        }
    }

    /// Lists everything written so far, then writes the manifest itself.
    pub fn finish(&mut self, out: &mut OutputDir) -> Result<()> {
        self.finished_unix = now();
        self.outputs = out.written.clone();
        let path = out.path().join(MANIFEST);
        std::fs::write(&path, to_json(self)).with_context(|| format!("cannot write {}", path.display()))
    }
}
