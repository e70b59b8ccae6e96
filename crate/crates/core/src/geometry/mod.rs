//! Surface node sets with unit normals, node generators for the test
//! surfaces, point-cloud I/O, and nearest-neighbor stencil construction.

use std::collections::HashMap;

use thiserror::Error;

use crate::Vec3;

mod kdtree;
mod io;

pub use io::{load_point_cloud, write_point_cloud, PointCloudFormat};
pub use kdtree::KdTree;

/// Errors produced while generating, loading or querying node sets.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("points and normals differ in length ({points} vs {normals})")]
    LengthMismatch { points: usize, normals: usize },
    #[error("node set must contain at least one node")]
    Empty,
    #[error("normal {index} has norm {norm} (must be 1 within 1e-12)")]
    NonUnitNormal { index: usize, norm: f64 },
    #[error("normal {index} is zero or missing")]
    DegenerateNormal { index: usize },
    #[error("points {first} and {second} are identical")]
    DuplicatePoint { first: usize, second: usize },
    #[error("subdivision level {level} exceeds the supported maximum {max}")]
    LevelTooLarge { level: u32, max: u32 },
    #[error("torus grid parameter m={m} must be at least 2")]
    TorusTooCoarse { m: usize },
    #[error("point {index} is off the unit sphere by {residual:.3e}")]
    OffSphere { index: usize, residual: f64 },
    #[error("stencil size {n} exceeds node count {nodes}")]
    StencilTooLarge { n: usize, nodes: usize },
    #[error("stencil size must be positive")]
    ZeroStencil,
    #[error("stencil of size 1 has no point pairs")]
    SingletonStencil,
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Scattered surface samples paired with unit outward normals.
///
/// Everything downstream consumes nodes through this type, so its
/// constructor enforces the global assumptions once: equal lengths,
/// unit normals and pairwise-distinct points.
#[derive(Debug, Clone)]
pub struct NodeSet {
    points: Vec<Vec3>,
    normals: Vec<Vec3>,
    surface_label: String,
}

impl NodeSet {
    pub fn new(
        points: Vec<Vec3>,
        normals: Vec<Vec3>,
        surface_label: impl Into<String>,
    ) -> Result<Self, GeometryError> {
        if points.len() != normals.len() {
            return Err(GeometryError::LengthMismatch {
                points: points.len(),
                normals: normals.len(),
            });
        }
        if points.is_empty() {
            return Err(GeometryError::Empty);
        }
        for (i, n) in normals.iter().enumerate() {
            let norm = n.norm();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(GeometryError::NonUnitNormal { index: i, norm });
            }
        }
        check_distinct(&points)?;
        Ok(Self {
            points,
            normals,
            surface_label: surface_label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn label(&self) -> &str {
        &self.surface_label
    }
}

/// Bit-exact duplicate detection; hashing the raw coordinate bits keeps this
/// O(N) so large node sets stay cheap to validate.
fn check_distinct(points: &[Vec3]) -> Result<(), GeometryError> {
    let mut seen: HashMap<[u64; 3], usize> = HashMap::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
        if let Some(&first) = seen.get(&key) {
            return Err(GeometryError::DuplicatePoint { first, second: i });
        }
        seen.insert(key, i);
    }
    Ok(())
}

/// Per-node stencils: row `k` holds node `k` followed by its `n-1` nearest
/// neighbors in ascending order of Euclidean distance (ties by lowest index).
#[derive(Debug, Clone)]
pub struct StencilSet {
    n: usize,
    indices: Vec<usize>,
}

impl StencilSet {
    /// Stencil size (nodes per row).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stencils (= number of nodes).
    pub fn len(&self) -> usize {
        self.indices.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn row(&self, k: usize) -> &[usize] {
        &self.indices[k * self.n..(k + 1) * self.n]
    }
}

/// Minimum pairwise spacings; `h_min_per_stencil[k]` feeds the shape
/// parameter heuristic for stencil `k`.
#[derive(Debug, Clone)]
pub struct FillStats {
    pub h_min_per_stencil: Vec<f64>,
    pub global_min_spacing: f64,
}

const ICOSA_MAX_LEVEL: u32 = 7;

/// Icosahedral sphere nodes: `N = 10*4^level + 2` points obtained by repeated
/// edge-midpoint subdivision of the icosahedron, reprojected to the unit
/// sphere. The outward normal at a sphere point is the point itself.
pub fn icosahedral_sphere_nodes(level: u32) -> Result<NodeSet, GeometryError> {
    if level > ICOSA_MAX_LEVEL {
        return Err(GeometryError::LevelTooLarge {
            level,
            max: ICOSA_MAX_LEVEL,
        });
    }

    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut points: Vec<Vec3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();

    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut new_faces = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, points: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let m = ((points[a] + points[b]) * 0.5).normalize();
                points.push(m);
                points.len() - 1
            })
        };
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut points);
            let bc = midpoint(b, c, &mut points);
            let ca = midpoint(c, a, &mut points);
            new_faces.push([a, ab, ca]);
            new_faces.push([b, bc, ab]);
            new_faces.push([c, ca, bc]);
            new_faces.push([ab, bc, ca]);
        }
        faces = new_faces;
    }

    let normals = points.clone();
    NodeSet::new(points, normals, format!("sphere-icosa-l{level}"))
}

/// Maps intrinsic torus angles to a point on the `(1 - sqrt(x^2+y^2))^2 +
/// z^2 = 1/9` torus.
pub fn torus_point(phi: f64, lambda: f64) -> Vec3 {
    let ring = 1.0 + phi.cos() / 3.0;
    Vec3::new(ring * lambda.cos(), ring * lambda.sin(), phi.sin() / 3.0)
}

/// Unit outward normal of the torus at a surface point, from the gradient of
/// the implicit form `(1 - sqrt(x^2+y^2))^2 + z^2 - 1/9`.
pub fn torus_normal(p: &Vec3) -> Vec3 {
    let rho = p.x.hypot(p.y);
    let g = Vec3::new(
        -2.0 * (1.0 - rho) * p.x / rho,
        -2.0 * (1.0 - rho) * p.y / rho,
        2.0 * p.z,
    );
    g.normalize()
}

/// Staggered torus nodes: two interleaved `m x 3m` intrinsic grids offset by
/// half a cell, for `N = 6 m^2` total nodes.
pub fn torus_staggered_nodes(m: usize) -> Result<NodeSet, GeometryError> {
    if m < 2 {
        return Err(GeometryError::TorusTooCoarse { m });
    }
    let mf = m as f64;
    let mut points = Vec::with_capacity(6 * m * m);
    for (phi_off, lam_off) in [(0.0, 0.0), (std::f64::consts::PI / mf, std::f64::consts::PI / (3.0 * mf))] {
        for i in 0..m {
            let phi = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / mf + phi_off;
            for j in 0..3 * m {
                let lambda =
                    -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / (3.0 * mf) + lam_off;
                points.push(torus_point(phi, lambda));
            }
        }
    }
    let normals = points.iter().map(torus_normal).collect();
    NodeSet::new(points, normals, format!("torus-staggered-m{m}"))
}

/// Biconcave profile constants, scaled to unit maximal radius.
pub const RBC_C0: f64 = 0.207161;
pub const RBC_C1: f64 = 2.002558;
pub const RBC_C2: f64 = -1.122762;

/// Maps unit-sphere nodes onto an idealized red blood cell surface.
///
/// A sphere point `(x, y, z)` with `rho = sqrt(x^2+y^2)` keeps its azimuth
/// and is given the biconcave height
/// `z' = sign(z) * 0.5 * sqrt(1-rho^2) * (c0 + c1 rho^2 + c2 rho^4)`.
/// Normals come from the cross product of the parametric tangents.
pub fn map_sphere_to_rbc(sphere_nodes: &NodeSet) -> Result<NodeSet, GeometryError> {
    let mut points = Vec::with_capacity(sphere_nodes.len());
    let mut normals = Vec::with_capacity(sphere_nodes.len());
    for (i, p) in sphere_nodes.points().iter().enumerate() {
        let residual = (p.norm() - 1.0).abs();
        if residual > 1e-10 {
            return Err(GeometryError::OffSphere { index: i, residual });
        }
        let rho2 = p.x * p.x + p.y * p.y;
        let rho = rho2.sqrt();
        let profile = RBC_C0 + RBC_C1 * rho2 + RBC_C2 * rho2 * rho2;
        let z = p.z.signum() * 0.5 * (1.0 - rho2).max(0.0).sqrt() * profile;
        points.push(Vec3::new(p.x, p.y, z));

        // Tangent cross product of the (colatitude, azimuth) parametrization,
        // reduced to n ~ (-Z'(alpha) * cos(beta), -Z'(alpha) * sin(beta), cos(alpha))
        // with cos(alpha) = p.z and sin(alpha) = rho.
        if rho < 1e-14 {
            normals.push(Vec3::new(0.0, 0.0, p.z.signum()));
        } else {
            let dprofile = RBC_C1 + 2.0 * RBC_C2 * rho2;
            let zprime = -0.5 * rho * profile + rho * p.z * p.z * dprofile;
            let n = Vec3::new(-zprime * p.x / rho, -zprime * p.y / rho, p.z);
            normals.push(n.normalize());
        }
    }
    let label = format!("rbc<-{}", sphere_nodes.label());
    NodeSet::new(points, normals, label)
}

/// Builds all `N` nearest-neighbor stencils from a single k-d tree.
pub fn build_stencils(nodes: &NodeSet, n: usize) -> Result<StencilSet, GeometryError> {
    if n == 0 {
        return Err(GeometryError::ZeroStencil);
    }
    if n > nodes.len() {
        return Err(GeometryError::StencilTooLarge {
            n,
            nodes: nodes.len(),
        });
    }
    let tree = KdTree::build(nodes.points());
    let mut indices = vec![0usize; nodes.len() * n];
    use rayon::prelude::*;
    indices
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(k, row)| {
            let nn = tree.knn(&nodes.points()[k], n);
            debug_assert_eq!(nn[0], k, "center must be its own nearest neighbor");
            row.copy_from_slice(&nn);
        });
    Ok(StencilSet { n, indices })
}

/// Minimum pairwise distance within each stencil, plus the global minimum.
pub fn stencil_min_spacing(
    nodes: &NodeSet,
    stencils: &StencilSet,
) -> Result<FillStats, GeometryError> {
    if stencils.n() < 2 {
        return Err(GeometryError::SingletonStencil);
    }
    let points = nodes.points();
    let h_min_per_stencil: Vec<f64> = (0..stencils.len())
        .map(|k| {
            let row = stencils.row(k);
            let mut h_min = f64::INFINITY;
            for (a, &i) in row.iter().enumerate() {
                for &j in &row[a + 1..] {
                    h_min = h_min.min((points[i] - points[j]).norm());
                }
            }
            h_min
        })
        .collect();
    let global_min_spacing = h_min_per_stencil.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(FillStats {
        h_min_per_stencil,
        global_min_spacing,
    })
}
