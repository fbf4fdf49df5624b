//! CSV tables, the run report and atomic file output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

/// In-memory CSV stream with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: &str, header: &[&str]) -> Self {
        Self {
            file: file.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_nums(&mut self, values: &[f64]) {
        self.push(values.iter().map(|&v| fmt_num(v)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "{}", self.file);
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// One pass/fail comparison of the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `measured <= threshold`.
    pub fn at_most(name: &str, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold,
            pass: measured <= threshold,
        }
    }

    /// Passes when `measured >= threshold`.
    pub fn at_least(name: &str, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold,
            pass: measured >= threshold,
        }
    }

    /// Passes when `measured > threshold`.
    pub fn above(name: &str, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold,
            pass: measured > threshold,
        }
    }

    /// Passes when `measured < threshold`.
    pub fn below(name: &str, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold,
            pass: measured < threshold,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    /// Constants derived from the parameters (`s`, `a`, `p₊`, ...).
    pub derived: Vec<(String, f64)>,
    pub checks: Vec<Check>,
    /// Measured values reported without a pass/fail verdict.
    pub metrics: Vec<(String, f64)>,
    pub files: Vec<String>,
    pub wall_clock_seconds: f64,
    /// Solver error that stopped the run early, if any.
    pub error: Option<String>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    pub fn summary_table(&self) -> Table {
        let mut t = Table::new("summary.csv", &["name", "measured", "threshold", "pass"]);
        for c in &self.checks {
            t.push(vec![
                c.name.clone(),
                fmt_num(c.measured),
                fmt_num(c.threshold),
                c.pass.to_string(),
            ]);
        }
        t
    }
}

/// Writes `contents` next to `path` under a temporary name, then renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("output");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Writes every table, `summary.csv` and `report.json`; returns the manifest
/// in write order.
pub fn write_outputs(
    report: &mut RunReport,
    tables: &[Table],
    dir: &Path,
) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let summary = report.summary_table();
    let mut files: Vec<String> = tables.iter().map(|t| t.file.clone()).collect();
    files.push(summary.file.clone());
    files.push("report.json".into());
    report.files = files;

    let mut written = Vec::new();
    for table in tables.iter().chain(std::iter::once(&summary)) {
        let path = dir.join(&table.file);
        write_atomic(&path, table.render().as_bytes())?;
        written.push(path);
    }
    let json = serde_json::to_string_pretty(report).map_err(std::io::Error::other)?;
    let path = dir.join("report.json");
    write_atomic(&path, json.as_bytes())?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0, 1e-300, -2.5e17, 1.0 / 3.0] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn table_renders_header_and_rows() {
        let mut t = Table::new("x.csv", &["a", "b"]);
        t.push_nums(&[1.0, 0.5]);
        assert_eq!(t.render(), "a,b\n1.0,0.5\n");
    }

    #[test]
    fn check_relations() {
        assert!(Check::at_most("a", 1.0, 1.0).pass);
        assert!(!Check::below("a", 1.0, 1.0).pass);
        assert!(Check::at_least("a", 2.0, 1.0).pass);
        assert!(!Check::at_most("a", f64::NAN, 1.0).pass);
    }

    #[test]
    fn atomic_write_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
