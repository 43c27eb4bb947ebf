//! CSV tables with `#` metadata, run manifests and atomic file replacement.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";
pub const UNITS: &str = "energies, rates and temperatures in units of omega0 (hbar = k_B = 1)";

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            metadata: vec![("schema_version".into(), SCHEMA_VERSION.to_string())],
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r[i].parse().ok()).collect()
    }

    pub fn to_bytes(&self) -> csv::Result<Vec<u8>> {
        let mut out = Vec::new();
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }

    pub fn read(path: &Path) -> Result<Self, csv::Error> {
        let text = fs::read_to_string(path)?;
        let metadata = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .filter_map(|l| {
                let (k, v) = l.trim_start_matches('#').split_once(':')?;
                Some((k.trim().to_string(), v.trim().to_string()))
            })
            .collect();
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Self { metadata, header, rows })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Completed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceFlag {
    pub key: String,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub code_version: String,
    pub seed: Option<u64>,
    pub units: String,
    pub config_path: Option<String>,
    pub config: serde_json::Value,
    pub status: RunStatus,
    pub started_unix: f64,
    pub wall_clock_seconds: Option<f64>,
    pub convergence: Vec<ConvergenceFlag>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Output directory of one run: owns the manifest and records every file.
pub struct RunDir {
    pub dir: PathBuf,
    pub manifest: Manifest,
    started: Instant,
}

impl RunDir {
    /// Creates the directory and writes the initial manifest.
    pub fn create(
        dir: &Path,
        command: &str,
        seed: Option<u64>,
        config_path: Option<&Path>,
        config: serde_json::Value,
    ) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        let started_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        let run = Self {
            dir: dir.to_path_buf(),
            manifest: Manifest {
                schema_version: SCHEMA_VERSION,
                command: command.into(),
                code_version: concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")).into(),
                seed,
                units: UNITS.into(),
                config_path: config_path.map(|p| p.display().to_string()),
                config,
                status: RunStatus::Running,
                started_unix,
                wall_clock_seconds: None,
                convergence: Vec::new(),
                outputs: Vec::new(),
                error: None,
            },
            started: Instant::now(),
        };
        run.save_manifest()?;
        Ok(run)
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dir.join(MANIFEST_NAME)
    }

    fn save_manifest(&self) -> std::io::Result<()> {
        let text = serde_json::to_vec_pretty(&self.manifest).map_err(std::io::Error::other)?;
        write_atomic(&self.manifest_path(), &text)
    }

    fn record(&mut self, name: &str) {
        if !self.manifest.outputs.iter().any(|o| o == name) {
            self.manifest.outputs.push(name.to_string());
        }
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        let bytes = table.to_bytes().map_err(std::io::Error::other)?;
        write_atomic(&path, &bytes)?;
        self.record(name);
        Ok(path)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, text.as_bytes())?;
        self.record(name);
        Ok(path)
    }

    /// Registers a file written elsewhere (checkpoints).
    pub fn note_output(&mut self, name: &str) {
        self.record(name);
    }

    pub fn flag(&mut self, key: impl Into<String>, converged: bool, detail: Option<String>) {
        self.manifest.convergence.push(ConvergenceFlag {
            key: key.into(),
            converged,
            detail,
        });
    }

    pub fn finish(mut self, error: Option<String>) -> std::io::Result<()> {
        self.manifest.status = if error.is_some() {
            RunStatus::Failed
        } else {
            RunStatus::Completed
        };
        self.manifest.error = error;
        self.manifest.wall_clock_seconds = Some(self.started.elapsed().as_secs_f64());
        self.save_manifest()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(&["t", "label"]).meta("command", "demo");
        t.push(vec![num(0.1), "a, with comma".into()]);
        t.push(vec![num(1e-300), "b".into()]);
        let path = dir.path().join("x.csv");
        fs::write(&path, t.to_bytes().unwrap()).unwrap();
        let back = Table::read(&path).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.column("t").unwrap(), vec![0.1, 1e-300]);
        assert_eq!(back.get_meta("schema_version"), Some("1"));
    }

    #[test]
    fn manifest_lifecycle() {
        let dir = tempfile::tempdir().unwrap();
        let run = RunDir::create(dir.path(), "steady", Some(3), None, serde_json::json!({"a": 1})).unwrap();
        let m: Manifest = serde_json::from_slice(&fs::read(run.manifest_path()).unwrap()).unwrap();
        assert_eq!(m.status, RunStatus::Running);
        let path = run.manifest_path();
        run.finish(None).unwrap();
        let m: Manifest = serde_json::from_slice(&fs::read(path).unwrap()).unwrap();
        assert_eq!(m.status, RunStatus::Completed);
        assert!(m.wall_clock_seconds.is_some());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
