//! Global sparse surface-Laplacian assembly, bandwidth-reducing reordering
//! and spectral diagnostics.
//!
//! Each node contributes one weight row supported on its stencil, so the
//! assembled matrix has exactly `n` entries per row and density `n/N` by
//! construction.

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{build_stencils, stencil_min_spacing, GeometryError, NodeSet};
use crate::rbf::{local_system, Kernel, KernelFamily, RbfError, WeightRow};
use crate::shape_param::{
    heuristic_epsilon, optimize_epsilon, EpsilonRecord, EpsilonReport, HeuristicModel,
    OptimizerConfig, ShapeParamError,
};

mod spectral;

pub use spectral::{spectral_abscissa, SpectralEstimate, SpectralMode};

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("stencil {index}: {source}")]
    StencilWeights {
        index: usize,
        source: RbfError,
    },
    #[error("stencil {index}: {source}")]
    StencilShapeParam {
        index: usize,
        source: ShapeParamError,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("dense eigendecomposition limited to dimension 4000, operator has {0}")]
    DenseTooLarge(usize),
    #[error("Arnoldi iteration broke down; use dense mode instead")]
    ArnoldiBreakdown,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Compressed-sparse-row matrix holding assembled RBF-FD weights.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    /// Permutation applied relative to the original labeling, if any:
    /// `permutation[new] = old`.
    permutation: Option<Vec<usize>>,
}

impl SparseOperator {
    /// Builds an operator from per-row `(column, value)` entry lists.
    /// Entries are canonicalized to ascending column order.
    pub fn from_rows(dim: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), dim);
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            for (c, v) in row {
                debug_assert!(c < dim);
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        SparseOperator {
            dim,
            row_ptr,
            col_idx,
            values,
            permutation: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Fraction of stored entries: `nnz / N^2`.
    pub fn density(&self) -> f64 {
        self.nnz() as f64 / (self.dim as f64 * self.dim as f64)
    }

    pub fn permutation(&self) -> Option<&[usize]> {
        self.permutation.as_deref()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    /// `y = L x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let span = self.row_ptr[i]..self.row_ptr[i + 1];
            let mut acc = 0.0;
            for (c, v) in self.col_idx[span.clone()].iter().zip(&self.values[span]) {
                acc += v * x[*c];
            }
            *yi = acc;
        });
    }

    pub fn matvec_alloc(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.matvec(x, &mut y);
        y
    }

    /// Maximum absolute row sum.
    pub fn infinity_norm(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Row sums (the operator applied to the constant one-vector).
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.row(i).1.iter().sum::<f64>())
            .collect()
    }

    /// Maximum |i - j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut band = 0usize;
        for i in 0..self.dim {
            for &j in self.row(i).0 {
                band = band.max(i.abs_diff(j));
            }
        }
        band
    }

    /// `alpha * I + beta * L`, on the operator's own sparsity pattern. Every
    /// stencil contains its center, so the diagonal is always present.
    pub fn scaled_add_identity(&self, alpha: f64, beta: f64) -> SparseOperator {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= beta;
        }
        for i in 0..self.dim {
            let span = self.row_ptr[i]..self.row_ptr[i + 1];
            let local = self.col_idx[span.clone()]
                .iter()
                .position(|&c| c == i)
                .expect("diagonal entry missing");
            out.values[self.row_ptr[i] + local] += alpha;
        }
        out
    }

    /// Relabels rows and columns: entry `(new_i, new_j)` of the result is
    /// entry `(perm[new_i], perm[new_j])` of `self`.
    pub fn apply_permutation(&self, perm: &[usize]) -> SparseOperator {
        assert_eq!(perm.len(), self.dim);
        let mut inverse = vec![0usize; self.dim];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let rows: Vec<Vec<(usize, f64)>> = perm
            .iter()
            .map(|&old_i| {
                let (cols, vals) = self.row(old_i);
                cols.iter()
                    .zip(vals)
                    .map(|(&c, &v)| (inverse[c], v))
                    .collect()
            })
            .collect();
        let mut out = SparseOperator::from_rows(self.dim, rows);
        out.permutation = Some(match &self.permutation {
            None => perm.to_vec(),
            Some(prev) => perm.iter().map(|&p| prev[p]).collect(),
        });
        out
    }

    /// Dense copy, for small-scale diagnostics and tests.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut dense = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                dense[(i, j)] = v;
            }
        }
        dense
    }

    /// Writes the operator in Matrix Market coordinate format (real,
    /// general), 1-based indices.
    pub fn write_matrix_market<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.dim, self.dim, self.nnz())?;
        for i in 0..self.dim {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                writeln!(out, "{} {} {v:e}", i + 1, j + 1)?;
            }
        }
        Ok(())
    }
}

/// How the shape parameter is chosen during assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonStrategy {
    /// Optimize a per-stencil epsilon to this target condition number.
    PerStencilKappa(f64),
    /// One shape parameter for every stencil.
    FixedEpsilon(f64),
}

/// Assembly knobs beyond the strategy. `Default` gives the IMQ kernel and
/// the built-in heuristic seed model.
#[derive(Debug, Clone, Default)]
pub struct AssemblyOptions {
    pub family: Option<KernelFamily>,
    pub heuristic: Option<HeuristicModel>,
    pub optimizer: Option<OptimizerConfig>,
}

/// Assembles the global surface-Laplacian matrix: one weight row per node,
/// scattered at the stencil's column indices.
pub fn assemble_laplacian(
    nodes: &NodeSet,
    n: usize,
    strategy: EpsilonStrategy,
) -> Result<(SparseOperator, EpsilonReport), OperatorError> {
    assemble_laplacian_with(nodes, n, strategy, &AssemblyOptions::default())
}

/// [`assemble_laplacian`] with kernel family, heuristic model and optimizer
/// overrides.
pub fn assemble_laplacian_with(
    nodes: &NodeSet,
    n: usize,
    strategy: EpsilonStrategy,
    options: &AssemblyOptions,
) -> Result<(SparseOperator, EpsilonReport), OperatorError> {
    let family = options.family.unwrap_or(KernelFamily::Imq);
    let stencils = build_stencils(nodes, n)?;
    let fill = match strategy {
        EpsilonStrategy::PerStencilKappa(_) => Some(stencil_min_spacing(nodes, &stencils)?),
        EpsilonStrategy::FixedEpsilon(_) => None,
    };
    let default_model;
    let model = match &options.heuristic {
        Some(m) => m,
        None => {
            default_model = HeuristicModel::default();
            &default_model
        }
    };

    let rows: Result<Vec<(Vec<(usize, f64)>, EpsilonRecord)>, OperatorError> = (0..nodes.len())
        .into_par_iter()
        .map(|k| {
            let row = stencils.row(k);
            let points: Vec<_> = row.iter().map(|&i| nodes.points()[i]).collect();
            let normals: Vec<_> = row.iter().map(|&i| nodes.normals()[i]).collect();

            let (epsilon, record) = match strategy {
                EpsilonStrategy::FixedEpsilon(eps) => (eps, None),
                EpsilonStrategy::PerStencilKappa(kappa_target) => {
                    let h_min = fill.as_ref().unwrap().h_min_per_stencil[k];
                    let seed = heuristic_epsilon(h_min, kappa_target, model);
                    let config = options
                        .optimizer
                        .clone()
                        .unwrap_or_else(|| OptimizerConfig::new(kappa_target));
                    let rec = optimize_epsilon(&points, family, &config, seed)
                        .map_err(|source| OperatorError::StencilShapeParam { index: k, source })?;
                    (rec.epsilon, Some(rec))
                }
            };

            let kernel = Kernel { family, epsilon };
            let sys = local_system(&points, &normals, &kernel)
                .map_err(|source| OperatorError::StencilWeights { index: k, source })?;
            let weights: Vec<f64> = sys.laplacian.row(0).iter().copied().collect();
            let weight_row = WeightRow::new(k, row.to_vec(), weights)
                .map_err(|source| OperatorError::StencilWeights { index: k, source })?;

            let record = record.unwrap_or(EpsilonRecord {
                epsilon,
                achieved_kappa: sys.kappa,
                iterations: 0,
                clamped: false,
            });
            let entries = weight_row
                .neighbor_indices
                .iter()
                .copied()
                .zip(weight_row.weights.iter().copied())
                .collect();
            Ok((entries, record))
        })
        .collect();

    let rows = rows?;
    let mut records = Vec::with_capacity(rows.len());
    let mut entry_rows = Vec::with_capacity(rows.len());
    for (entries, record) in rows {
        entry_rows.push(entries);
        records.push(record);
    }
    let op = SparseOperator::from_rows(nodes.len(), entry_rows);
    Ok((op, EpsilonReport { records }))
}

/// Reverse Cuthill-McKee ordering on the symmetrized pattern of the
/// operator. Returns `perm` with `perm[new] = old`; feed it to
/// [`SparseOperator::apply_permutation`].
pub fn rcm_order(op: &SparseOperator) -> Vec<usize> {
    let n = op.dim();
    // Undirected adjacency from the pattern of L + L^T, diagonal dropped.
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in op.row(i).0 {
            if i != j {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    for neighbors in &mut adjacency {
        neighbors.sort_unstable();
        neighbors.dedup();
    }
    let degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    loop {
        // Start each component at an unvisited vertex of minimum degree.
        let start = (0..n)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| (degree[v], v));
        let Some(start) = start else { break };
        visited[start] = true;
        order.push(start);
        let mut head = order.len() - 1;
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<usize> = adjacency[v]
                .iter()
                .copied()
                .filter(|&u| !visited[u])
                .collect();
            next.sort_unstable_by_key(|&u| (degree[u], u));
            for u in next {
                visited[u] = true;
                order.push(u);
            }
        }
    }
    order.reverse();
    order
}

/// Summary of an assembled operator's structure and spectrum.
#[derive(Debug, Clone)]
pub struct OperatorDiagnostics {
    pub density: f64,
    pub bandwidth_before: usize,
    pub bandwidth_after: usize,
    pub spectral: SpectralEstimate,
}

/// Computes sparsity, RCM bandwidth reduction and the spectral estimate in
/// one pass.
pub fn diagnostics(
    op: &SparseOperator,
    mode: SpectralMode,
) -> Result<OperatorDiagnostics, OperatorError> {
    let bandwidth_before = op.bandwidth();
    let perm = rcm_order(op);
    let bandwidth_after = op.apply_permutation(&perm).bandwidth();
    let spectral = spectral_abscissa(op, mode)?;
    Ok(OperatorDiagnostics {
        density: op.density(),
        bandwidth_before,
        bandwidth_after,
        spectral,
    })
}

#[cfg(test)]
mod tests;
