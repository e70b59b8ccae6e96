//! Local RBF machinery: kernel evaluation, tangent-plane projection, the
//! augmented interpolation system, projected-gradient differentiation
//! matrices and the per-stencil surface-Laplacian weight row.
//!
//! For a stencil `P = {x_1, ..., x_n}` the interpolation matrix `A` carries
//! kernel values plus a constant augmentation row/column. The matrices
//! `B^x, B^y, B^z` hold projected kernel gradients evaluated at the stencil
//! nodes, `G^d = B^d A^{-1}` (restricted to its first `n` columns) realizes
//! one surface-gradient component as an `n x n` differentiation matrix, and
//! `L_P = G^x G^x + G^y G^y + G^z G^z` mimics the continuous composition of
//! surface gradients. Row one of `L_P` is the finite-difference weight row
//! for the stencil center.

use nalgebra::{DMatrix, Matrix3};
use thiserror::Error;

use crate::Vec3;

#[derive(Debug, Error)]
pub enum RbfError {
    #[error("shape parameter must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("normal has norm {0}, expected 1 within 1e-10")]
    NonUnitNormal(f64),
    #[error("stencil points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),
    #[error("stencil needs points and normals of equal nonzero length")]
    BadStencilShape,
    #[error("interpolation matrix is numerically singular (condition number {kappa:.3e})")]
    SingularSystem { kappa: f64 },
    #[error("weight row sum {sum:.3e} exceeds {tol:.3e} (constants not annihilated)")]
    WeightSumViolation { sum: f64, tol: f64 },
}

/// Radial kernel family. The IMQ kernel is the workhorse; the others share
/// the interface for experimentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Imq,
    Gaussian,
    Multiquadric,
}

/// A radial kernel with its shape parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub family: KernelFamily,
    pub epsilon: f64,
}

impl Kernel {
    pub fn new(family: KernelFamily, epsilon: f64) -> Result<Self, RbfError> {
        if !(epsilon > 0.0) {
            return Err(RbfError::NonPositiveEpsilon(epsilon));
        }
        Ok(Kernel { family, epsilon })
    }

    pub fn imq(epsilon: f64) -> Result<Self, RbfError> {
        Kernel::new(KernelFamily::Imq, epsilon)
    }

    /// Kernel value `phi(r)`.
    pub fn eval(&self, r: f64) -> f64 {
        let s = (self.epsilon * r) * (self.epsilon * r);
        match self.family {
            KernelFamily::Imq => 1.0 / (1.0 + s).sqrt(),
            KernelFamily::Gaussian => (-s).exp(),
            KernelFamily::Multiquadric => (1.0 + s).sqrt(),
        }
    }

    /// Radial derivative factor `eta(r) = phi'(r)/r`, in closed form so the
    /// removable 0/0 at `r = 0` never arises.
    pub fn eta(&self, r: f64) -> f64 {
        let e2 = self.epsilon * self.epsilon;
        let s = e2 * r * r;
        match self.family {
            KernelFamily::Imq => -e2 * (1.0 + s).powf(-1.5),
            KernelFamily::Gaussian => -2.0 * e2 * (-s).exp(),
            KernelFamily::Multiquadric => e2 / (1.0 + s).sqrt(),
        }
    }
}

/// Tangent-plane projector `P = I - n n^T` at a surface point with unit
/// outward normal `n`.
pub fn projection_matrix(normal: &Vec3) -> Result<Matrix3<f64>, RbfError> {
    let norm = normal.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(RbfError::NonUnitNormal(norm));
    }
    Ok(Matrix3::identity() - normal * normal.transpose())
}

/// Pairwise Euclidean distances of a stencil, with an error on coincident
/// points. Factored out so shape-parameter searches can reuse it while
/// re-evaluating the kernel.
pub fn pairwise_distances(points: &[Vec3]) -> Result<DMatrix<f64>, RbfError> {
    let n = points.len();
    let mut r = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let d = (points[i] - points[j]).norm();
            if d == 0.0 {
                return Err(RbfError::DuplicatePoints(j, i));
            }
            r[(i, j)] = d;
            r[(j, i)] = d;
        }
    }
    Ok(r)
}

/// Augmented interpolation matrix from precomputed distances: kernel values
/// in the leading `n x n` block, ones in the last row/column, zero corner.
pub fn interpolation_matrix_from_distances(
    distances: &DMatrix<f64>,
    kernel: &Kernel,
) -> DMatrix<f64> {
    let n = distances.nrows();
    let mut a = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = kernel.eval(distances[(i, j)]);
        }
        a[(i, n)] = 1.0;
        a[(n, i)] = 1.0;
    }
    a
}

/// Augmented interpolation matrix of a stencil.
pub fn interpolation_matrix(points: &[Vec3], kernel: &Kernel) -> Result<DMatrix<f64>, RbfError> {
    Ok(interpolation_matrix_from_distances(
        &pairwise_distances(points)?,
        kernel,
    ))
}

/// Everything computed for one stencil: the interpolation system, the three
/// projected-gradient right-hand sides, the differentiation matrices and the
/// local surface Laplacian.
#[derive(Debug, Clone)]
pub struct LocalSystem {
    pub a: DMatrix<f64>,
    pub bx: DMatrix<f64>,
    pub by: DMatrix<f64>,
    pub bz: DMatrix<f64>,
    pub gx: DMatrix<f64>,
    pub gy: DMatrix<f64>,
    pub gz: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
    /// Condition number of `a` at this kernel.
    pub kappa: f64,
}

/// Builds the full local system for one stencil.
///
/// `A` is factored once and reused for all three right-hand sides. Errors if
/// the interpolation matrix is numerically singular (condition number beyond
/// `1/eps_machine`).
pub fn local_system(
    points: &[Vec3],
    normals: &[Vec3],
    kernel: &Kernel,
) -> Result<LocalSystem, RbfError> {
    let n = points.len();
    if n == 0 || normals.len() != n {
        return Err(RbfError::BadStencilShape);
    }
    let distances = pairwise_distances(points)?;
    let a = interpolation_matrix_from_distances(&distances, kernel);

    let kappa = condition_number_sym(&a);
    if !(kappa < f64::EPSILON.recip()) {
        return Err(RbfError::SingularSystem { kappa });
    }

    // (B^d)_{i,j} = eta(r_ij) * p^d(x_i) . (x_i - x_j); constant column zero.
    let mut bx = DMatrix::zeros(n, n + 1);
    let mut by = DMatrix::zeros(n, n + 1);
    let mut bz = DMatrix::zeros(n, n + 1);
    for i in 0..n {
        let ni = &normals[i];
        let norm = ni.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(RbfError::NonUnitNormal(norm));
        }
        for j in 0..n {
            let d = points[i] - points[j];
            let eta = kernel.eta(distances[(i, j)]);
            let ndotd = ni.dot(&d);
            bx[(i, j)] = eta * (d.x - ni.x * ndotd);
            by[(i, j)] = eta * (d.y - ni.y * ndotd);
            bz[(i, j)] = eta * (d.z - ni.z * ndotd);
        }
    }

    let lu = a.clone().lu();
    // G^d = B^d A^{-1}; with A symmetric, solve A X = (B^d)^T and transpose.
    let mut grads = Vec::with_capacity(3);
    for b in [&bx, &by, &bz] {
        let solved = lu
            .solve(&b.transpose())
            .ok_or(RbfError::SingularSystem { kappa })?;
        // Restrict to the first n columns: acting on data padded with the
        // trailing augmentation zero.
        grads.push(solved.transpose().columns(0, n).into_owned());
    }
    let gz = grads.pop().unwrap();
    let gy = grads.pop().unwrap();
    let gx = grads.pop().unwrap();

    let laplacian = &gx * &gx + &gy * &gy + &gz * &gz;

    Ok(LocalSystem {
        a,
        bx,
        by,
        bz,
        gx,
        gy,
        gz,
        laplacian,
        kappa,
    })
}

/// The three surface-gradient differentiation matrices of a stencil.
pub fn surface_grad_matrices(
    points: &[Vec3],
    normals: &[Vec3],
    kernel: &Kernel,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>), RbfError> {
    let sys = local_system(points, normals, kernel)?;
    Ok((sys.gx, sys.gy, sys.gz))
}

/// Local surface Laplacian `L_P` and the weight row for the stencil center
/// (its first row).
pub fn local_laplacian(
    points: &[Vec3],
    normals: &[Vec3],
    kernel: &Kernel,
) -> Result<(DMatrix<f64>, Vec<f64>), RbfError> {
    let sys = local_system(points, normals, kernel)?;
    let weights = sys.laplacian.row(0).iter().copied().collect();
    Ok((sys.laplacian, weights))
}

/// One assembled finite-difference row: the surface Laplacian at
/// `center_index` as a linear combination of values at `neighbor_indices`.
#[derive(Debug, Clone)]
pub struct WeightRow {
    pub center_index: usize,
    pub neighbor_indices: Vec<usize>,
    pub weights: Vec<f64>,
}

impl WeightRow {
    /// Validates the constant-annihilation invariant: the weights must sum
    /// to zero within `1e-8 * max|w|`.
    pub fn new(
        center_index: usize,
        neighbor_indices: Vec<usize>,
        weights: Vec<f64>,
    ) -> Result<Self, RbfError> {
        let sum: f64 = weights.iter().sum();
        let max = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        let tol = 1e-8 * max;
        if sum.abs() > tol {
            return Err(RbfError::WeightSumViolation { sum, tol });
        }
        Ok(WeightRow {
            center_index,
            neighbor_indices,
            weights,
        })
    }
}

/// Two-norm condition number of a symmetric matrix from its eigenvalues:
/// `max|lambda| / min|lambda|`, or `+inf` when exactly singular.
pub fn condition_number_sym(a: &DMatrix<f64>) -> f64 {
    let eig = a.clone().symmetric_eigenvalues();
    let mut max = 0.0f64;
    let mut min = f64::INFINITY;
    for lambda in eig.iter() {
        let m = lambda.abs();
        max = max.max(m);
        min = min.min(m);
    }
    if min == 0.0 {
        return f64::INFINITY;
    }
    max / min
}
