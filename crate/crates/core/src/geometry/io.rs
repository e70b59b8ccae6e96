//! Point-cloud readers and writers.
//!
//! CSV: header `x,y,z,nx,ny,nz`, one record per line. PLY: ASCII 1.0 with
//! the same six vertex properties. Loaded normals are renormalized to unit
//! length; a missing or zero normal rejects the record.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::Vec3;

use super::{GeometryError, NodeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointCloudFormat {
    Csv,
    Ply,
}

impl PointCloudFormat {
    /// Guesses the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("ply") => PointCloudFormat::Ply,
            _ => PointCloudFormat::Csv,
        }
    }
}

fn parse_error(path: &Path, message: impl Into<String>) -> GeometryError {
    GeometryError::Parse {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Loads a point cloud with normals and validates it as a [`NodeSet`].
pub fn load_point_cloud(path: &Path, format: PointCloudFormat) -> Result<NodeSet, GeometryError> {
    let records = match format {
        PointCloudFormat::Csv => read_csv(path)?,
        PointCloudFormat::Ply => read_ply(path)?,
    };
    let mut points = Vec::with_capacity(records.len());
    let mut normals = Vec::with_capacity(records.len());
    for (index, (p, n)) in records.into_iter().enumerate() {
        let norm = n.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(parse_error(
                path,
                format!("record {index}: zero or non-finite normal ({}, {}, {})", n.x, n.y, n.z),
            ));
        }
        points.push(p);
        normals.push(n / norm);
    }
    let label = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("point-cloud")
        .to_string();
    NodeSet::new(points, normals, label)
}

fn read_csv(path: &Path) -> Result<Vec<(Vec3, Vec3)>, GeometryError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_error(path, "empty file"))??;
    let header_fields: Vec<&str> = header.split(',').map(str::trim).collect();
    if header_fields != ["x", "y", "z", "nx", "ny", "nz"] {
        return Err(parse_error(
            path,
            format!("expected header x,y,z,nx,ny,nz, found `{header}`"),
        ));
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(parse_error(
                path,
                format!("record {lineno}: expected 6 fields, found {}", fields.len()),
            ));
        }
        let mut vals = [0.0f64; 6];
        for (i, f) in fields.iter().enumerate() {
            vals[i] = f.parse::<f64>().map_err(|e| {
                parse_error(path, format!("record {lineno}: bad number `{f}`: {e}"))
            })?;
        }
        records.push((
            Vec3::new(vals[0], vals[1], vals[2]),
            Vec3::new(vals[3], vals[4], vals[5]),
        ));
    }
    Ok(records)
}

fn read_ply(path: &Path) -> Result<Vec<(Vec3, Vec3)>, GeometryError> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();

    match lines.next() {
        Some(Ok(l)) if l.trim() == "ply" => {}
        _ => return Err(parse_error(path, "missing `ply` magic line")),
    }

    let mut vertex_count: Option<usize> = None;
    let mut properties: Vec<String> = Vec::new();
    let mut in_vertex_element = false;
    loop {
        let line = lines
            .next()
            .ok_or_else(|| parse_error(path, "unterminated header"))??;
        let line = line.trim().to_string();
        if line == "end_header" {
            break;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["format", "ascii", _] => {}
            ["format", other, _] => {
                return Err(parse_error(path, format!("unsupported PLY format `{other}`")))
            }
            ["comment", ..] => {}
            ["element", "vertex", count] => {
                in_vertex_element = true;
                vertex_count = Some(count.parse().map_err(|_| {
                    parse_error(path, format!("bad vertex count `{count}`"))
                })?);
            }
            ["element", ..] => in_vertex_element = false,
            ["property", _ty, name] if in_vertex_element => {
                properties.push((*name).to_string());
            }
            ["property", ..] => {}
            [] => {}
            _ => return Err(parse_error(path, format!("unrecognized header line `{line}`"))),
        }
    }
    let vertex_count =
        vertex_count.ok_or_else(|| parse_error(path, "no vertex element in header"))?;

    let mut column = [usize::MAX; 6];
    for (target, name) in ["x", "y", "z", "nx", "ny", "nz"].iter().enumerate() {
        column[target] = properties
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| parse_error(path, format!("vertex property `{name}` missing")))?;
    }

    let mut records = Vec::with_capacity(vertex_count);
    for index in 0..vertex_count {
        let line = lines
            .next()
            .ok_or_else(|| parse_error(path, format!("vertex {index}: unexpected end of file")))??;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < properties.len() {
            return Err(parse_error(
                path,
                format!("vertex {index}: expected {} fields, found {}", properties.len(), fields.len()),
            ));
        }
        let mut vals = [0.0f64; 6];
        for (target, &col) in column.iter().enumerate() {
            let f = fields[col];
            vals[target] = f.parse::<f64>().map_err(|e| {
                parse_error(path, format!("vertex {index}: bad number `{f}`: {e}"))
            })?;
        }
        records.push((
            Vec3::new(vals[0], vals[1], vals[2]),
            Vec3::new(vals[3], vals[4], vals[5]),
        ));
    }
    Ok(records)
}

/// Writes a node set in the given format. Floats are printed with Rust's
/// shortest round-trip representation, so a CSV round trip is bit-exact.
pub fn write_point_cloud(
    path: &Path,
    format: PointCloudFormat,
    nodes: &NodeSet,
) -> Result<(), GeometryError> {
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        PointCloudFormat::Csv => {
            writeln!(out, "x,y,z,nx,ny,nz")?;
            for (p, n) in nodes.points().iter().zip(nodes.normals()) {
                writeln!(out, "{},{},{},{},{},{}", p.x, p.y, p.z, n.x, n.y, n.z)?;
            }
        }
        PointCloudFormat::Ply => {
            writeln!(out, "ply")?;
            writeln!(out, "format ascii 1.0")?;
            writeln!(out, "comment {}", nodes.label())?;
            writeln!(out, "element vertex {}", nodes.len())?;
            for name in ["x", "y", "z", "nx", "ny", "nz"] {
                writeln!(out, "property double {name}")?;
            }
            writeln!(out, "end_header")?;
            for (p, n) in nodes.points().iter().zip(nodes.normals()) {
                writeln!(out, "{} {} {} {} {} {}", p.x, p.y, p.z, n.x, n.y, n.z)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
