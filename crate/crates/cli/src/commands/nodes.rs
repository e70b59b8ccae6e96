//! `rbffd nodes`: generate or convert surface node sets.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use rbffd::geometry::{build_stencils, stencil_min_spacing, write_point_cloud, PointCloudFormat};

use crate::surfaces::SurfaceSpec;

#[derive(Debug, Args)]
pub struct NodesArgs {
    /// Surface family: sphere, rbc, torus or file.
    #[arg(long)]
    pub surface: String,
    /// Icosahedral subdivision level (sphere/rbc).
    #[arg(long)]
    pub level: Option<u32>,
    /// Torus grid parameter (N = 6 m^2).
    #[arg(long)]
    pub m: Option<usize>,
    /// Input point cloud (surface `file`).
    #[arg(long)]
    pub path: Option<PathBuf>,
    /// Output file; extension selects csv or ply unless --format is given.
    #[arg(long)]
    pub out: PathBuf,
    /// Output format override: csv or ply.
    #[arg(long)]
    pub format: Option<String>,
}

pub fn run(args: &NodesArgs) -> Result<()> {
    let spec = SurfaceSpec::resolve(
        &args.surface,
        args.level,
        args.m,
        None,
        args.path.as_deref(),
    )?;
    let nodes = spec.build()?;

    let format = match args.format.as_deref() {
        Some("csv") => PointCloudFormat::Csv,
        Some("ply") => PointCloudFormat::Ply,
        Some(other) => anyhow::bail!("unknown format `{other}`"),
        None => PointCloudFormat::from_path(&args.out),
    };
    write_point_cloud(&args.out, format, &nodes).context("writing node set")?;

    // Report the minimum spacing so thin-feature sampling problems are
    // visible before any weights are computed.
    let spacing = if nodes.len() >= 2 {
        let stencils = build_stencils(&nodes, 2)?;
        stencil_min_spacing(&nodes, &stencils)?.global_min_spacing
    } else {
        f64::NAN
    };
    println!(
        "wrote {} nodes ({}) to {} — global min spacing {spacing:.6e}",
        nodes.len(),
        spec.describe(),
        args.out.display()
    );
    Ok(())
}
