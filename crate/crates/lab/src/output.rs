//! CSV tables with `#` metadata lines, and the run manifest.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(x) => write!(f, "{x:e}"),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Text(s) => write!(f, "{s}"),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as u64)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// A named CSV table. The schema name and version go into the first header
/// line, followed by free-form metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub schema: String,
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

pub const SCHEMA_VERSION: u32 = 1;

impl Table {
    pub fn new(file: impl Into<String>, schema: impl Into<String>, columns: Vec<String>) -> Self {
        Table { file: file.into(), schema: schema.into(), meta: Vec::new(), columns, rows: Vec::new() }
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl fmt::Display) -> Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = format!("# schema: {}/{}\n", self.schema, SCHEMA_VERSION);
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"));
        out
    }

    pub fn write(&self, dir: &Path) -> LabResult<()> {
        let path = dir.join(&self.file);
        fs::write(&path, self.render()).map_err(|e| LabError::io(&path, e))
    }
}

/// A CSV file as read back for comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub schema: Option<String>,
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ParsedCsv {
    pub fn parse(text: &str) -> LabResult<Self> {
        let mut schema = None;
        let mut meta = Vec::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            if let Some((k, v)) = line.trim_start_matches('#').trim().split_once(':') {
                if k.trim() == "schema" {
                    schema = Some(v.trim().to_string());
                } else {
                    meta.push((k.trim().to_string(), v.trim().to_string()));
                }
            }
        }
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let columns = reader
            .headers()
            .map_err(|e| LabError::Schema(format!("unreadable header: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = reader
            .records()
            .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<Result<Vec<Vec<String>>, _>>()
            .map_err(|e| LabError::Schema(format!("malformed row: {e}")))?;
        Ok(ParsedCsv { schema, meta, columns, rows })
    }

    pub fn read(path: &Path) -> LabResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// The body of a CSV document: everything after the `#` header lines.
pub fn csv_body(text: &str) -> String {
    text.lines().skip_while(|l| l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

/// Manifest text: version comment lines followed by the effective config,
/// which can be passed back to `run` unchanged.
pub fn manifest(config_toml: &str) -> String {
    format!(
        "# tangentlab {}\n# tangentlab-core {}\n# csv schema version {}\n{}",
        env!("CARGO_PKG_VERSION"),
        tangentlab_core::VERSION,
        SCHEMA_VERSION,
        config_toml
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_and_parse_round_trip() {
        let mut t = Table::new("x.csv", "trajectory", vec!["t".into(), "a".into(), "kind".into()]).with_meta("seed", 7);
        t.push(vec![0.0.into(), 1.5.into(), "kick".into()]);
        t.push(vec![0.1.into(), (-2e-9).into(), "record".into()]);
        let text = t.render();
        assert!(text.starts_with("# schema: trajectory/1\n# seed: 7\nt,a,kind\n"));
        let p = ParsedCsv::parse(&text).unwrap();
        assert_eq!(p.schema.as_deref(), Some("trajectory/1"));
        assert_eq!(p.meta, vec![("seed".to_string(), "7".to_string())]);
        assert_eq!(p.rows[1][1].parse::<f64>().unwrap(), -2e-9);
        assert_eq!(csv_body(&text).lines().next(), Some("t,a,kind"));
    }

    #[test]
    fn floats_round_trip_exactly() {
        for x in [0.1, 1.0 / 3.0, -7.25e-300, 6.02e23] {
            assert_eq!(Cell::Num(x).to_string().parse::<f64>().unwrap(), x);
        }
    }
}
