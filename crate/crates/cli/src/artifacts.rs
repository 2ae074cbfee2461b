//! Report, field, table and heatmap files written by a run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use dbar_core::grid::format::{write_field, ScalarKind};
use dbar_core::grid::Field;
use serde::Serialize;

use crate::error::Result;

/// A numeric table written as CSV.
#[derive(Clone, Debug)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Everything an operation produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub pass: bool,
    pub summary: serde_json::Value,
    pub fields: Vec<(String, Field)>,
    pub tables: Vec<(String, Table)>,
}

impl Outcome {
    pub fn new(pass: bool, summary: impl Serialize) -> Result<Self> {
        Ok(Outcome {
            pass,
            summary: serde_json::to_value(summary)?,
            fields: Vec::new(),
            tables: Vec::new(),
        })
    }

    pub fn field(mut self, name: &str, f: Field) -> Self {
        self.fields.push((name.to_string(), f));
        self
    }

    pub fn table(mut self, name: &str, t: Table) -> Self {
        self.tables.push((name.to_string(), t));
        self
    }
}

/// Cell-by-cell heatmap of a one-variable scalar field over the mask.
pub fn heatmap_csv(f: &Field) -> String {
    let g = f.grid();
    let mut s = String::from("x,y,re,im,abs\n");
    for i in (0..g.len()).filter(|&i| g.mask()[i]) {
        let (z, v) = (g.z(i), f.at(i));
        let _ = writeln!(s, "{:e},{:e},{:e},{:e},{:e}", z.re, z.im, v.re, v.im, v.norm());
    }
    s
}

/// 8-bit binary PGM of `|f|`, scaled to the largest finite modulus; rows run
/// from the top (largest `y`) down.
pub fn heatmap_pgm(f: &Field) -> Vec<u8> {
    let g = f.grid();
    let (nx, ny) = (g.shape()[0], g.shape()[1]);
    let top = (0..g.len())
        .filter(|&i| g.mask()[i])
        .map(|i| f.at(i).norm())
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    for b in (0..ny).rev() {
        for a in 0..nx {
            let i = g.ravel(&[a, b]);
            let v = f.at(i).norm();
            let level = if !g.mask()[i] || !v.is_finite() || top == 0.0 {
                0
            } else {
                (255.0 * v / top).round().clamp(0.0, 255.0) as u8
            };
            out.push(level);
        }
    }
    out
}

/// Write all artifacts into `dir` and return the paths written, sorted.
pub fn write_all(dir: &Path, report: &serde_json::Value, outcome: &Outcome, pgm: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let report_path = dir.join("report.json");
    fs::write(&report_path, serde_json::to_string_pretty(report)? + "\n")?;
    written.push(report_path);
    for (name, f) in &outcome.fields {
        let path = dir.join(format!("{name}.dbf"));
        write_field(&path, f, ScalarKind::F64)?;
        written.push(path.clone());
        written.push(dbar_core::grid::format::sidecar_path(&path));
        if f.grid().nvars() != 1 {
            continue;
        }
        for r in 0..f.rows() {
            for c in 0..f.cols() {
                let part = if f.is_scalar() { f.clone() } else { f.component(r, c) };
                let stem = if f.is_scalar() { name.clone() } else { format!("{name}_{r}{c}") };
                let csv = dir.join(format!("{stem}.csv"));
                fs::write(&csv, heatmap_csv(&part))?;
                written.push(csv);
                if pgm {
                    let p = dir.join(format!("{stem}.pgm"));
                    fs::write(&p, heatmap_pgm(&part))?;
                    written.push(p);
                }
            }
        }
    }
    for (name, t) in &outcome.tables {
        let path = dir.join(format!("{name}.csv"));
        fs::write(&path, t.to_csv())?;
        written.push(path);
    }
    written.sort();
    Ok(written)
}
