//! Run-directory writers: snapshots, legacy VTK polydata and convergence
//! tables.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use rbffd::geometry::NodeSet;

/// Snapshot CSV with schema `x,y,z,u,v`.
pub fn write_snapshot_csv(path: &Path, nodes: &NodeSet, u: &[f64], v: &[f64]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "x,y,z,u,v")?;
    for (k, p) in nodes.points().iter().enumerate() {
        writeln!(out, "{},{},{},{},{}", p.x, p.y, p.z, u[k], v[k])?;
    }
    out.flush().context("writing snapshot csv")
}

/// Legacy ASCII VTK polydata: points as vertices with two point scalars.
pub fn write_snapshot_vtk(
    path: &Path,
    title: &str,
    nodes: &NodeSet,
    u: &[f64],
    v: &[f64],
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let n = nodes.len();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET POLYDATA")?;
    writeln!(out, "POINTS {n} double")?;
    for p in nodes.points() {
        writeln!(out, "{} {} {}", p.x, p.y, p.z)?;
    }
    writeln!(out, "VERTICES {n} {}", 2 * n)?;
    for k in 0..n {
        writeln!(out, "1 {k}")?;
    }
    writeln!(out, "POINT_DATA {n}")?;
    for (name, field) in [("u", u), ("v", v)] {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for value in field {
            writeln!(out, "{value}")?;
        }
    }
    out.flush().context("writing snapshot vtk")
}

/// One resolution of a convergence study.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub n_nodes: usize,
    pub l2: f64,
    pub linf: f64,
    /// Observed orders versus the previous row; NaN on the first row.
    pub order_l2: f64,
    pub order_linf: f64,
}

/// Fills in observed orders between consecutive rows:
/// `log(e_prev/e_next) / log(sqrt(N_next)/sqrt(N_prev))`.
pub fn attach_orders(rows: &mut [ConvergenceRow]) {
    for i in 0..rows.len() {
        if i == 0 {
            rows[i].order_l2 = f64::NAN;
            rows[i].order_linf = f64::NAN;
            continue;
        }
        let ratio = ((rows[i].n_nodes as f64).sqrt() / (rows[i - 1].n_nodes as f64).sqrt()).ln();
        rows[i].order_l2 = (rows[i - 1].l2 / rows[i].l2).ln() / ratio;
        rows[i].order_linf = (rows[i - 1].linf / rows[i].linf).ln() / ratio;
    }
}

/// Convergence CSV with schema `N,sqrtN,l2,linf,order_l2,order_linf`.
pub fn write_convergence_csv(path: &Path, rows: &[ConvergenceRow]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "N,sqrtN,l2,linf,order_l2,order_linf")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{:e},{:e},{},{}",
            row.n_nodes,
            (row.n_nodes as f64).sqrt(),
            row.l2,
            row.linf,
            row.order_l2,
            row.order_linf
        )?;
    }
    out.flush().context("writing convergence csv")
}

/// Relative discrete error norms against an exact sample vector.
pub fn relative_errors(numeric: &[f64], exact: &[f64]) -> (f64, f64) {
    let mut diff2 = 0.0f64;
    let mut exact2 = 0.0f64;
    let mut diff_inf = 0.0f64;
    let mut exact_inf = 0.0f64;
    for (a, b) in numeric.iter().zip(exact) {
        let d = a - b;
        diff2 += d * d;
        exact2 += b * b;
        diff_inf = diff_inf.max(d.abs());
        exact_inf = exact_inf.max(b.abs());
    }
    (
        (diff2 / exact2).sqrt(),
        diff_inf / exact_inf,
    )
}
