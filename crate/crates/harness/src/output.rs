//! CSV tables, content hashes and the sample file format.

use std::fs;
use std::path::{Path, PathBuf};

use langevin_core::diagnostics::fmt;
use langevin_core::SampleBatch;
use sha2::{Digest, Sha256};

use crate::error::{config_err, HarnessError, Result};

/// Reals with 17 significant digits; NaN as an empty field.
pub fn real(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        fmt(v)
    }
}

/// An in-memory CSV table with a versioned schema name.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(schema: &'static str, header: &[&str]) -> Table {
        Table { schema, header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| HarnessError::io("<csv buffer>", e.into_error()))
    }
}

/// A file written by a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub name: String,
    pub path: PathBuf,
    pub schema: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_table(dir: &Path, name: &str, t: &Table) -> Result<Written> {
    write_bytes(dir, name, t.schema, &t.to_bytes()?)
}

pub fn write_bytes(dir: &Path, name: &str, schema: &str, bytes: &[u8]) -> Result<Written> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| HarnessError::io(&path, e))?;
    Ok(Written { name: name.to_string(), path, schema: schema.to_string(), sha256: sha256_hex(bytes) })
}

/// `samples/v1`: `chain,x0,…,x{d−1}`, one row per sample.
pub fn samples_table(batch: &SampleBatch, per_chain: usize) -> Table {
    let d = batch.dim();
    let mut header = vec!["chain".to_string()];
    header.extend((0..d).map(|j| format!("x{j}")));
    let mut t = Table { schema: "samples/v1", header, rows: Vec::with_capacity(batch.len()) };
    for (i, r) in batch.rows().enumerate() {
        let mut row = vec![(i / per_chain.max(1)).to_string()];
        row.extend(r.iter().map(|v| real(*v)));
        t.rows.push(row);
    }
    t
}

/// Reads the `x*` columns of a samples CSV.
pub fn read_samples(path: &Path) -> Result<SampleBatch> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::io(path, io),
        other => HarnessError::Config(format!("{}: {other:?}", path.display())),
    })?;
    let header = r.headers()?.clone();
    let cols: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with('x') && h[1..].parse::<usize>().is_ok())
        .map(|(i, _)| i)
        .collect();
    if cols.is_empty() {
        return Err(config_err(format!("{}: no x0.. columns", path.display())));
    }
    let mut data = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        for &c in &cols {
            let f = rec.get(c).unwrap_or("");
            data.push(f.parse::<f64>().map_err(|_| config_err(format!("{}: bad number `{f}`", path.display())))?);
        }
    }
    Ok(SampleBatch::new(cols.len(), data))
}
