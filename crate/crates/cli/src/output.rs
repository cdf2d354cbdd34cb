//! Atomic CSV and JSON-lines writers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::ConfigError;

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_err(path: &Path, source: std::io::Error) -> ConfigError {
    ConfigError::Write {
        path: path.display().to_string(),
        source,
    }
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ConfigError> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| write_err(dir, e))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(|e| write_err(path, e))
}

/// A CSV table with optional `# key=value` header lines.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Table {
    pub comments: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            comments: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn comment(&mut self, key: &str, value: impl ToString) {
        self.comments.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: &[f64]) {
        self.push_cells(row.iter().map(|x| fmt_f64(*x)).collect());
    }

    pub fn push_cells(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, ConfigError> {
        let mut out = String::new();
        for (k, v) in &self.comments {
            out.push_str(&format!("# {k}={v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| ConfigError::Invalid(format!("csv encoding failed: {e}"));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| ConfigError::Invalid(format!("csv encoding failed: {e}")))?;
        out.push_str(&String::from_utf8_lossy(&bytes));
        Ok(out)
    }
}

/// Files produced by one run.
#[derive(Debug, Default)]
pub struct Emitted {
    pub records: Vec<serde_json::Value>,
    pub table: Option<Table>,
}

impl Emitted {
    pub fn record<T: Serialize>(&mut self, kind: &str, value: &T) {
        let mut v = serde_json::to_value(value).expect("reports always serialize");
        if let serde_json::Value::Object(map) = &mut v {
            map.insert("record".into(), kind.into());
        } else {
            v = serde_json::json!({ "record": kind, "value": v });
        }
        self.records.push(v);
    }

    pub fn jsonl(&self) -> String {
        self.records.iter().map(|r| format!("{r}\n")).collect()
    }

    /// Writes `<stem>.jsonl` and, when present, `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>, ConfigError> {
        let mut paths = Vec::new();
        let jsonl = dir.join(format!("{stem}.jsonl"));
        write_atomic(&jsonl, self.jsonl().as_bytes())?;
        paths.push(jsonl);
        if let Some(table) = &self.table {
            let csv = dir.join(format!("{stem}.csv"));
            write_atomic(&csv, table.to_csv()?.as_bytes())?;
            paths.push(csv);
        }
        Ok(paths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_has_comments_then_header() {
        let mut t = Table::new(&["t", "x"]);
        t.comment("a", 1);
        t.push(&[0.0, 0.5]);
        let csv = t.to_csv().unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(
            lines,
            ["# a=1", "t,x", "0.0000000000000000e0,5.0000000000000000e-1"]
        );
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("f.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
