//! Sparse LU with partial pivoting, factored once and reused across time
//! steps.
//!
//! Left-looking (Gilbert-Peierls) factorization: each column is obtained by
//! a sparse triangular solve against the already-computed columns of `L`,
//! with the reachable pattern found by depth-first search. Row pivoting
//! picks the largest candidate in the not-yet-pivotal rows.

use super::TimesteppingError;
use crate::operator::SparseOperator;

/// Column-compressed triangular factors of a row-permuted matrix,
/// `P A = L U`.
#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    /// `pinv[original_row] = permuted_row`.
    pinv: Vec<usize>,
    l_colptr: Vec<usize>,
    l_rowidx: Vec<usize>,
    l_values: Vec<f64>,
    u_colptr: Vec<usize>,
    u_rowidx: Vec<usize>,
    u_values: Vec<f64>,
    u_diag: Vec<f64>,
}

/// Factors a square sparse matrix. Fails on structural or numerical
/// singularity (no admissible pivot in some column).
pub fn sparse_lu_factor(a: &SparseOperator) -> Result<SparseLu, TimesteppingError> {
    let n = a.dim();

    // CSR -> CSC.
    let mut col_counts = vec![0usize; n + 1];
    for i in 0..n {
        for &j in a.row(i).0 {
            col_counts[j + 1] += 1;
        }
    }
    for j in 0..n {
        col_counts[j + 1] += col_counts[j];
    }
    let nnz = col_counts[n];
    let mut a_rowidx = vec![0usize; nnz];
    let mut a_values = vec![0.0f64; nnz];
    {
        let mut next = col_counts.clone();
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let p = next[j];
                a_rowidx[p] = i;
                a_values[p] = v;
                next[j] += 1;
            }
        }
    }
    let a_colptr = col_counts;

    const UNPIVOTED: usize = usize::MAX;
    let mut pinv = vec![UNPIVOTED; n];

    let mut l_colptr = vec![0usize];
    let mut l_rowidx: Vec<usize> = Vec::with_capacity(4 * nnz);
    let mut l_values: Vec<f64> = Vec::with_capacity(4 * nnz);
    let mut u_colptr = vec![0usize];
    let mut u_rowidx: Vec<usize> = Vec::with_capacity(4 * nnz);
    let mut u_values: Vec<f64> = Vec::with_capacity(4 * nnz);
    let mut u_diag = vec![0.0f64; n];

    // Workspaces for the sparse solve.
    let mut x = vec![0.0f64; n];
    let mut marked = vec![usize::MAX; n]; // column at which a row was last reached
    let mut topo: Vec<usize> = Vec::with_capacity(n);
    let mut dfs_stack: Vec<(usize, usize)> = Vec::with_capacity(n);

    for k in 0..n {
        // Reach: depth-first search from the pattern of A(:,k) through the
        // columns of L (a row reached that is already pivotal expands into
        // its L column).
        topo.clear();
        for p in a_colptr[k]..a_colptr[k + 1] {
            let root = a_rowidx[p];
            if marked[root] == k {
                continue;
            }
            dfs_stack.push((root, 0));
            marked[root] = k;
            while let Some((node, child)) = dfs_stack.pop() {
                let col = pinv[node];
                let (start, end) = if col == UNPIVOTED {
                    (0, 0)
                } else {
                    (l_colptr[col], l_colptr[col + 1])
                };
                let mut advanced = false;
                for q in (start + child)..end {
                    let next = l_rowidx[q];
                    if marked[next] != k {
                        marked[next] = k;
                        dfs_stack.push((node, q - start + 1));
                        dfs_stack.push((next, 0));
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    topo.push(node); // post-order
                }
            }
        }

        // Numeric: scatter A(:,k), then eliminate in topological order.
        for &i in &topo {
            x[i] = 0.0;
        }
        for p in a_colptr[k]..a_colptr[k + 1] {
            x[a_rowidx[p]] = a_values[p];
        }
        for idx in (0..topo.len()).rev() {
            let i = topo[idx];
            let col = pinv[i];
            if col == UNPIVOTED {
                continue;
            }
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for q in l_colptr[col]..l_colptr[col + 1] {
                x[l_rowidx[q]] -= l_values[q] * xi;
            }
        }

        // Partial pivoting over not-yet-pivotal rows.
        let mut pivot_row = UNPIVOTED;
        let mut pivot_mag = 0.0f64;
        for &i in &topo {
            if pinv[i] == UNPIVOTED {
                let mag = x[i].abs();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = i;
                }
            }
        }
        if pivot_row == UNPIVOTED || pivot_mag == 0.0 {
            return Err(TimesteppingError::SingularMatrix { column: k });
        }
        let pivot = x[pivot_row];
        pinv[pivot_row] = k;
        u_diag[k] = pivot;

        for &i in &topo {
            let xi = x[i];
            if pinv[i] != UNPIVOTED && pinv[i] != k {
                // Entry of U in permuted row pinv[i] < k.
                if xi != 0.0 {
                    u_rowidx.push(pinv[i]);
                    u_values.push(xi);
                }
            } else if i != pivot_row && xi != 0.0 {
                l_rowidx.push(i); // original index; remapped after the loop
                l_values.push(xi / pivot);
            }
        }
        l_colptr.push(l_rowidx.len());
        u_colptr.push(u_rowidx.len());
    }

    // Remap L's row indices into permuted positions and sort columns.
    for r in &mut l_rowidx {
        *r = pinv[*r];
    }
    sort_columns(n, &mut l_colptr, &mut l_rowidx, &mut l_values);
    sort_columns(n, &mut u_colptr, &mut u_rowidx, &mut u_values);

    Ok(SparseLu {
        n,
        pinv,
        l_colptr,
        l_rowidx,
        l_values,
        u_colptr,
        u_rowidx,
        u_values,
        u_diag,
    })
}

fn sort_columns(n: usize, colptr: &mut [usize], rowidx: &mut [usize], values: &mut [f64]) {
    let mut scratch: Vec<(usize, f64)> = Vec::new();
    for k in 0..n {
        let span = colptr[k]..colptr[k + 1];
        scratch.clear();
        scratch.extend(rowidx[span.clone()].iter().copied().zip(values[span.clone()].iter().copied()));
        scratch.sort_unstable_by_key(|&(r, _)| r);
        for (offset, &(r, v)) in scratch.iter().enumerate() {
            rowidx[span.start + offset] = r;
            values[span.start + offset] = v;
        }
    }
}

impl SparseLu {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries in both factors (fill included).
    pub fn factor_nnz(&self) -> usize {
        self.l_values.len() + self.u_values.len() + self.n
    }

    /// Solves `A x = b` using the precomputed factors.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        // y = P b
        let mut y = vec![0.0f64; self.n];
        for (old, &new) in self.pinv.iter().enumerate() {
            y[new] = b[old];
        }
        // Forward: L is unit lower triangular, column oriented.
        for k in 0..self.n {
            let yk = y[k];
            if yk != 0.0 {
                for q in self.l_colptr[k]..self.l_colptr[k + 1] {
                    y[self.l_rowidx[q]] -= self.l_values[q] * yk;
                }
            }
        }
        // Backward: U holds the strictly-upper entries; diagonal separate.
        for k in (0..self.n).rev() {
            y[k] /= self.u_diag[k];
            let yk = y[k];
            if yk != 0.0 {
                for q in self.u_colptr[k]..self.u_colptr[k + 1] {
                    y[self.u_rowidx[q]] -= self.u_values[q] * yk;
                }
            }
        }
        y
    }
}
