//! Tidy long-format plot data (`series,x,y,yerr`) derived from a run's files.

use std::path::Path;

use crate::error::{config_err, HarnessError, Result};
use crate::manifest::RunManifest;
use crate::output::{write_bytes, write_table, Table, Written};

pub const PLOT_FILE: &str = "plot.csv";
pub const CONVEXIFY_PLOT_FILE: &str = "plot_convexify.csv";

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::io(path, io),
        other => config_err(format!("{}: {other:?}", path.display())),
    })?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

fn col(header: &[String], name: &str) -> Result<usize> {
    header.iter().position(|h| h == name).ok_or_else(|| config_err(format!("plot input lacks column {name}")))
}

/// Writes `plot.csv` from `sweep.csv` and/or `diagnostics.csv`, and
/// `plot_convexify.csv` from `convexify_grid.csv`, whichever the manifest lists.
pub fn emit_plot_data(manifest: &RunManifest) -> Result<Vec<Written>> {
    let dir = &manifest.out_dir;
    let sweep = manifest.file("sweep.csv");
    let diag = manifest.file("diagnostics.csv");
    let grid = manifest.file("convexify_grid.csv");
    if sweep.is_none() && diag.is_none() && grid.is_none() {
        return Err(config_err("manifest lists no sweep, diagnostics or convexify data"));
    }
    let mut out = Vec::new();
    if sweep.is_some() || diag.is_some() {
        let mut t = Table::new("plot/v1", &["series", "x", "y", "yerr"]);
        if let Some(f) = sweep {
            let (h, rows) = read_table(&f.path)?;
            let (eta, kl, se) = (col(&h, "eta")?, col(&h, "kl")?, col(&h, "kl_se")?);
            let (oracle, env) = (col(&h, "kl_oracle")?, col(&h, "envelope")?);
            for r in &rows {
                t.push(vec!["kl_vs_eta".into(), r[eta].clone(), r[kl].clone(), r[se].clone()]);
            }
            for (series, c) in [("kl_oracle", oracle), ("envelope", env)] {
                for r in rows.iter().filter(|r| !r[c].is_empty()) {
                    t.push(vec![series.into(), r[eta].clone(), r[c].clone(), String::new()]);
                }
            }
        }
        if let Some(f) = diag {
            let (h, rows) = read_table(&f.path)?;
            let (q, est, se, rhs) = (col(&h, "quantity")?, col(&h, "estimate")?, col(&h, "stderr")?, col(&h, "rhs")?);
            for r in rows.iter().filter(|r| !r[est].is_empty()) {
                t.push(vec![r[q].clone(), "0".into(), r[est].clone(), r[se].clone()]);
                if !r[rhs].is_empty() {
                    t.push(vec![format!("{}_rhs", r[q]), "0".into(), r[rhs].clone(), String::new()]);
                }
            }
        }
        out.push(write_table(dir, PLOT_FILE, &t)?);
    }
    if let Some(f) = grid {
        let bytes = std::fs::read(&f.path).map_err(|e| HarnessError::io(&f.path, e))?;
        out.push(write_bytes(dir, CONVEXIFY_PLOT_FILE, "plot_convexify/v1", &bytes)?);
    }
    Ok(out)
}
