use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use divchain::certify::hexfloat::to_hex;
use serde_json::{Map, Value as Json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

/// A header plus rows; every command emits exactly one.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Emission settings shared by all commands.
#[derive(Debug, Clone, Copy)]
pub struct Style {
    pub format: Format,
    pub hexfloat: bool,
}

fn float_text(x: f64, hex: bool) -> String {
    if hex {
        to_hex(x)
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn cell_text(c: &Cell, hex: bool) -> String {
    match c {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => float_text(*v, hex),
        Cell::Text(s) => s.clone(),
        Cell::Bool(b) => b.to_string(),
    }
}

fn cell_json(c: &Cell, hex: bool) -> Json {
    match c {
        Cell::Int(v) => Json::from(*v),
        Cell::Float(v) if hex || !v.is_finite() => Json::String(float_text(*v, hex)),
        Cell::Float(v) => Json::from(*v),
        Cell::Text(s) => Json::String(s.clone()),
        Cell::Bool(b) => Json::Bool(*b),
    }
}

pub fn write_table(table: &Table, style: Style, w: impl Write) -> io::Result<()> {
    match style.format {
        Format::Csv => {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(&table.columns)?;
            for row in &table.rows {
                out.write_record(row.iter().map(|c| cell_text(c, style.hexfloat)))?;
            }
            out.flush()
        }
        Format::Jsonl => {
            let mut w = BufWriter::new(w);
            for row in &table.rows {
                let obj: Map<String, Json> =
                    table.columns.iter().cloned().zip(row.iter().map(|c| cell_json(c, style.hexfloat))).collect();
                serde_json::to_writer(&mut w, &obj)?;
                writeln!(w)?;
            }
            w.flush()
        }
    }
}

/// Writes `text` to `path`, or standard output when `path` is absent.
pub fn emit_text(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

pub fn emit_table(path: Option<&Path>, table: &Table, style: Style) -> io::Result<()> {
    match path {
        Some(p) => write_table(table, style, File::create(p)?),
        None => write_table(table, style, io::stdout().lock()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_jsonl_shapes() {
        let mut t = Table::new(["n", "nu0", "name"]);
        t.push(vec![2u64.into(), 0.5f64.into(), "a,b".into()]);
        let mut buf = Vec::new();
        write_table(&t, Style { format: Format::Csv, hexfloat: false }, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,nu0,name\n2,5.0000000000000000e-1,\"a,b\"\n");
        let mut buf = Vec::new();
        write_table(&t, Style { format: Format::Jsonl, hexfloat: true }, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "{\"n\":2,\"nu0\":\"0x1p-1\",\"name\":\"a,b\"}\n");
    }
}
