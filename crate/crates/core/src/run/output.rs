use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::checks::TestStatistic;

/// Name of the digest column appended to every CSV.
pub const DIGEST_COLUMN: &str = "config_digest";

/// A named output payload, written under the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Comma-separated table with a header row and LF line ends; the config digest is the last column.
#[derive(Clone, Debug)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self { header: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self, digest: &str) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut header = self.header.clone();
        header.push(DIGEST_COLUMN.into());
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(String::as_str).chain([digest])).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn artifact(&self, name: impl Into<String>, digest: &str) -> Artifact {
        Artifact { name: name.into(), bytes: self.to_bytes(digest) }
    }
}

/// Shortest round-trip decimal form.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Parses a CSV written by [`CsvTable`], checking the header and that every row carries `digest`.
pub fn read_csv(bytes: &[u8], columns: &[&str], digest: Option<&str>) -> Result<Vec<Vec<String>>> {
    let mut r = csv::ReaderBuilder::new().from_reader(bytes);
    let header: Vec<String> = r.headers().map_err(|e| Error::Format(e.to_string()))?.iter().map(str::to_string).collect();
    let want: Vec<String> = columns.iter().map(|c| c.to_string()).chain([DIGEST_COLUMN.to_string()]).collect();
    if header != want {
        return Err(Error::Format(format!("header {header:?}, expected {want:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let mut row: Vec<String> = rec.iter().map(str::to_string).collect();
        let d = row.pop().unwrap_or_default();
        if let Some(want) = digest {
            if d != want {
                return Err(Error::Format(format!("row digest {d} differs from {want}")));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// One line of a test-report JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub estimate: f64,
    pub se: f64,
    pub threshold: f64,
    pub pass: bool,
    pub config_digest: String,
}

impl TestReport {
    pub fn from_statistic(s: &TestStatistic, digest: &str) -> Self {
        Self { test: s.name.clone(), estimate: s.estimate, se: s.se, threshold: s.threshold, pass: s.pass, config_digest: digest.into() }
    }

    /// Passes when `estimate ≤ threshold`.
    pub fn at_most(test: impl Into<String>, estimate: f64, se: f64, threshold: f64, digest: &str) -> Self {
        Self { test: test.into(), estimate, se, threshold, pass: estimate <= threshold, config_digest: digest.into() }
    }
}

pub fn reports_artifact(name: impl Into<String>, reports: &[TestReport]) -> Artifact {
    let mut bytes = serde_json::to_vec_pretty(reports).expect("reports serialize");
    bytes.push(b'\n');
    Artifact { name: name.into(), bytes }
}

/// Record of one invocation. The timestamp and elapsed time live only here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub tool_version: String,
    pub seed: u64,
    pub subcommand: String,
    pub outputs: Vec<String>,
    pub budget_seconds: f64,
    pub elapsed_seconds: f64,
    pub started_unix: u64,
    /// The resolved configuration, so the run can be replayed from the manifest alone.
    pub config: crate::run::config::RunConfig,
}

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Writes the artifacts in order, then the manifest; returns the written paths.
pub fn write_outputs(dir: &Path, artifacts: &[Artifact], manifest: &mut RunManifest) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for a in artifacts {
        let p = dir.join(&a.name);
        std::fs::write(&p, &a.bytes)?;
        paths.push(p);
    }
    manifest.outputs = artifacts.iter().map(|a| a.name.clone()).collect();
    let p = dir.join(MANIFEST_NAME);
    let mut text = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    text.push(b'\n');
    std::fs::write(&p, text)?;
    paths.push(p);
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_dialect() {
        let mut t = CsvTable::new(&["kind", "eps", "value"]);
        t.push(vec!["c0".into(), num(0.25), num(1e-3)]);
        let bytes = t.to_bytes("abc");
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(text, "kind,eps,value,config_digest\nc0,0.25,0.001,abc\n");
        assert_eq!(read_csv(&bytes, &["kind", "eps", "value"], Some("abc")).unwrap(), vec![vec!["c0", "0.25", "0.001"]]);
        assert!(read_csv(&bytes, &["kind", "eps", "value"], Some("other")).is_err());
        assert!(read_csv(&bytes, &["kind", "value"], None).is_err());
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1e-300, 123456.789, -2.5e17, std::f64::consts::PI] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn writes_manifest_last() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = crate::run::config::RunConfig::default();
        let mut m = RunManifest {
            config_digest: cfg.digest(),
            tool_version: "0".into(),
            seed: 0,
            subcommand: "constants".into(),
            outputs: vec![],
            budget_seconds: 1.0,
            elapsed_seconds: 0.0,
            started_unix: 0,
            config: cfg,
        };
        let a = Artifact { name: "a.csv".into(), bytes: b"x\n".to_vec() };
        let paths = write_outputs(dir.path(), &[a], &mut m).unwrap();
        assert_eq!(paths.len(), 2);
        let back: RunManifest = serde_json::from_slice(&std::fs::read(&paths[1]).unwrap()).unwrap();
        assert_eq!(back.outputs, vec!["a.csv".to_string()]);
    }
}
