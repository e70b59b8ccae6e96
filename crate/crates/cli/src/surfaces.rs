//! Surface selection shared by the subcommands.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rbffd::geometry::{
    icosahedral_sphere_nodes, load_point_cloud, map_sphere_to_rbc, torus_staggered_nodes,
    NodeSet, PointCloudFormat,
};

/// A resolvable surface: generated (sphere, RBC, torus) or loaded from disk.
#[derive(Debug, Clone)]
pub enum SurfaceSpec {
    Sphere { level: u32 },
    Rbc { level: u32 },
    Torus { m: usize },
    File { path: PathBuf },
}

impl SurfaceSpec {
    /// Builds a spec from a surface name plus whichever resolution argument
    /// applies (`level` for sphere/rbc, `m` for torus, `path` for files).
    pub fn resolve(
        surface: &str,
        level: Option<u32>,
        m: Option<usize>,
        n_hint: Option<usize>,
        path: Option<&Path>,
    ) -> Result<Self> {
        match surface {
            "sphere" => Ok(SurfaceSpec::Sphere {
                level: pick_level(level, n_hint)?,
            }),
            "rbc" => Ok(SurfaceSpec::Rbc {
                level: pick_level(level, n_hint)?,
            }),
            "torus" => {
                let m = match (m, n_hint) {
                    (Some(m), _) => m,
                    // N = 6 m^2 for the staggered torus grid.
                    (None, Some(n)) => ((n as f64 / 6.0).sqrt().round() as usize).max(2),
                    (None, None) => bail!("torus surface needs --m or an N hint"),
                };
                Ok(SurfaceSpec::Torus { m })
            }
            "file" => {
                let path = path.context("surface `file` needs --path")?;
                Ok(SurfaceSpec::File {
                    path: path.to_path_buf(),
                })
            }
            other => bail!("unknown surface `{other}` (expected sphere, rbc, torus or file)"),
        }
    }

    pub fn build(&self) -> Result<NodeSet> {
        Ok(match self {
            SurfaceSpec::Sphere { level } => icosahedral_sphere_nodes(*level)?,
            SurfaceSpec::Rbc { level } => {
                let sphere = icosahedral_sphere_nodes(*level)?;
                map_sphere_to_rbc(&sphere)?
            }
            SurfaceSpec::Torus { m } => torus_staggered_nodes(*m)?,
            SurfaceSpec::File { path } => {
                load_point_cloud(path, PointCloudFormat::from_path(path))?
            }
        })
    }

    pub fn describe(&self) -> String {
        match self {
            SurfaceSpec::Sphere { level } => format!("sphere level={level}"),
            SurfaceSpec::Rbc { level } => format!("rbc level={level}"),
            SurfaceSpec::Torus { m } => format!("torus m={m}"),
            SurfaceSpec::File { path } => format!("file {}", path.display()),
        }
    }
}

/// Icosahedral node counts are `10 * 4^level + 2`; an `N` hint picks the
/// closest level.
fn pick_level(level: Option<u32>, n_hint: Option<usize>) -> Result<u32> {
    if let Some(level) = level {
        return Ok(level);
    }
    let Some(n) = n_hint else {
        bail!("sphere/rbc surfaces need --level or an N hint");
    };
    let mut best = (usize::MAX, 0u32);
    for level in 0..=7u32 {
        let count = 10 * 4usize.pow(level) + 2;
        let miss = count.abs_diff(n);
        if miss < best.0 {
            best = (miss, level);
        }
    }
    Ok(best.1)
}
