//! Writing CSV, JSON and SVG files into a run directory and recording them
//! in a manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::Format;
use crate::CliError;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Shortest text that parses back to `round_sig(x)`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig(x);
    let a = r.abs();
    if a != 0.0 && !(1e-5..1e15).contains(&a) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(round_sig(*x)),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

/// Column-oriented table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, meta: &Value) -> Value {
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
        json!({ "columns": self.header, "rows": rows, "meta": meta })
    }
}

/// Parses a numeric CSV (header plus rows) as written by [`Table::to_csv`].
pub fn parse_numeric_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| CliError::Config("empty CSV".into()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
        let row = row.map_err(|_| CliError::Config(format!("line {}: non-numeric value in {line:?}", i + 2)))?;
        if row.len() != header.len() {
            return Err(CliError::Config(format!("line {}: {} fields, header has {}", i + 2, row.len(), header.len())));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path relative to the run directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// Writes files into one directory and remembers what it wrote.
#[derive(Debug)]
pub struct Emitter {
    dir: PathBuf,
    format: Format,
    svg: bool,
    entries: Vec<ManifestEntry>,
}

impl Emitter {
    pub fn new(dir: &Path, format: Format, svg: bool) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), format, svg, entries: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<ManifestEntry> {
        self.entries
    }

    pub fn write_bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, data).map_err(|e| CliError::io(&path, e))?;
        self.entries.retain(|e| e.path != name);
        self.entries.push(ManifestEntry { path: name.to_string(), sha256: sha256_hex(data), bytes: data.len() as u64 });
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// `stem.csv` and/or `stem.json`, per the chosen format.
    pub fn table(&mut self, stem: &str, table: &Table, meta: &Value) -> Result<(), CliError> {
        if self.format.csv() {
            self.write_bytes(&format!("{stem}.csv"), table.to_csv().as_bytes())?;
        }
        if self.format.json() {
            self.json(&format!("{stem}.json"), &table.to_json(meta))?;
        }
        Ok(())
    }

    /// `stem.svg` when SVG output is enabled.
    pub fn plot(&mut self, stem: &str, plot: &crate::svg::Plot) -> Result<(), CliError> {
        if self.svg {
            self.write_bytes(&format!("{stem}.svg"), plot.render().as_bytes())?;
        }
        Ok(())
    }
}
