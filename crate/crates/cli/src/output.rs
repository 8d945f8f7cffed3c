//! Flat-file artifacts: CSV tables, manifest and fit JSON.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

/// One CSV cell.
pub enum Cell {
    F(f64),
    I(i64),
    U(usize),
    B(bool),
    S(String),
    None,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits round-trip an f64
            Cell::F(v) => format!("{v:.16e}"),
            Cell::I(v) => v.to_string(),
            Cell::U(v) => v.to_string(),
            Cell::B(v) => v.to_string(),
            Cell::S(s) => s.clone(),
            Cell::None => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::None, Cell::F)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::I(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> anyhow::Result<()> {
    let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

/// `<prefix><suffix>`, keeping any directory part of the prefix.
pub fn artifact(prefix: &str, suffix: &str) -> std::path::PathBuf {
    std::path::PathBuf::from(format!("{prefix}{suffix}"))
}

/// Reads two numeric columns from a CSV with a header row.
pub fn read_columns(path: &str, x: &str, y: &str) -> anyhow::Result<(Vec<f64>, Vec<f64>)> {
    let mut rd = csv::Reader::from_path(path).with_context(|| format!("opening {path}"))?;
    let header = rd.headers()?.clone();
    let find = |name: &str| {
        header.iter().position(|h| h == name).with_context(|| format!("{path} has no column {name:?}"))
    };
    let (ix, iy) = (find(x)?, find(y)?);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let (a, b) = (rec.get(ix).unwrap_or(""), rec.get(iy).unwrap_or(""));
        if a.is_empty() || b.is_empty() {
            continue;
        }
        xs.push(a.parse().with_context(|| format!("bad number {a:?} in column {x}"))?);
        ys.push(b.parse().with_context(|| format!("bad number {b:?} in column {y}"))?);
    }
    Ok((xs, ys))
}
