use super::*;
use crate::geometry::icosahedral_sphere_nodes;
use crate::Vec3;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn diagonal_operator(diag: &[f64]) -> SparseOperator {
    let rows = diag.iter().enumerate().map(|(i, &v)| vec![(i, v)]).collect();
    SparseOperator::from_rows(diag.len(), rows)
}

#[test]
fn from_rows_canonicalizes_and_reports_density() {
    let rows = vec![
        vec![(2usize, 3.0), (0, 1.0)],
        vec![(1, -2.0), (2, 0.5)],
        vec![(2, 4.0), (1, 1.0)],
    ];
    let op = SparseOperator::from_rows(3, rows);
    assert_eq!(op.nnz(), 6);
    assert!((op.density() - 6.0 / 9.0).abs() < 1e-15);
    assert_eq!(op.row(0), (&[0usize, 2][..], &[1.0, 3.0][..]));
    assert_eq!(op.row(1), (&[1usize, 2][..], &[-2.0, 0.5][..]));
}

#[test]
fn assembled_rows_have_exactly_n_entries_and_vanishing_sums() {
    let nodes = icosahedral_sphere_nodes(2).unwrap();
    let (op, report) =
        assemble_laplacian(&nodes, 9, EpsilonStrategy::PerStencilKappa(1e8)).unwrap();
    assert_eq!(op.dim(), nodes.len());
    assert!((op.density() - 9.0 / nodes.len() as f64).abs() < 1e-15);
    for i in 0..op.dim() {
        assert_eq!(op.row(i).0.len(), 9);
    }
    let max_sum = op.row_sums().iter().fold(0.0f64, |m, s| m.max(s.abs()));
    assert!(max_sum <= 1e-8 * op.infinity_norm());
    assert_eq!(report.records.len(), nodes.len());
    assert_eq!(report.clamped_count(), 0);
    for r in &report.records {
        assert!(r.achieved_kappa / 1e8 < 1.2 && 1e8 / r.achieved_kappa < 1.2);
    }
}

#[test]
fn fixed_epsilon_assembly_records_conditioning() {
    let nodes = icosahedral_sphere_nodes(1).unwrap();
    let (_, report) = assemble_laplacian(&nodes, 7, EpsilonStrategy::FixedEpsilon(2.0)).unwrap();
    for r in &report.records {
        assert_eq!(r.epsilon, 2.0);
        assert_eq!(r.iterations, 0);
        assert!(r.achieved_kappa.is_finite());
    }
}

#[test]
fn assembly_surfaces_stencil_failures_with_index() {
    let nodes = icosahedral_sphere_nodes(2).unwrap();
    // A tiny fixed epsilon drives the local systems numerically singular.
    let err = assemble_laplacian(&nodes, 17, EpsilonStrategy::FixedEpsilon(1e-8)).unwrap_err();
    match err {
        OperatorError::StencilWeights { .. } => {}
        other => panic!("expected a stencil failure, got {other}"),
    }
}

#[test]
fn matvec_matches_dense_reconstruction() {
    let nodes = icosahedral_sphere_nodes(2).unwrap();
    let (op, _) = assemble_laplacian(&nodes, 9, EpsilonStrategy::PerStencilKappa(1e7)).unwrap();
    let dense = op.to_dense();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<f64> = (0..op.dim()).map(|_| rng.random::<f64>() - 0.5).collect();
    let y = op.matvec_alloc(&x);
    let xd = nalgebra::DVector::from_vec(x);
    let yd = &dense * &xd;
    let scale = yd.amax();
    for i in 0..op.dim() {
        assert!((y[i] - yd[i]).abs() <= 1e-13 * scale);
    }
}

#[test]
fn rcm_is_a_bijection_and_keeps_tridiagonal_banded() {
    let n = 40;
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            let mut row = vec![(i, 2.0)];
            if i > 0 {
                row.push((i - 1, -1.0));
            }
            if i + 1 < n {
                row.push((i + 1, -1.0));
            }
            row
        })
        .collect();
    let op = SparseOperator::from_rows(n, rows);
    let perm = rcm_order(&op);
    let mut sorted = perm.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, (0..n).collect::<Vec<_>>());
    assert!(op.apply_permutation(&perm).bandwidth() <= op.bandwidth());
}

#[test]
fn rcm_reduces_sphere_bandwidth() {
    let nodes = icosahedral_sphere_nodes(3).unwrap();
    let (op, _) = assemble_laplacian(&nodes, 9, EpsilonStrategy::FixedEpsilon(2.0)).unwrap();
    let perm = rcm_order(&op);
    let reordered = op.apply_permutation(&perm);
    assert!(
        reordered.bandwidth() < op.bandwidth(),
        "bandwidth {} -> {}",
        op.bandwidth(),
        reordered.bandwidth()
    );
    assert_eq!(reordered.permutation().unwrap().len(), op.dim());
}

#[test]
fn permutation_commutes_with_matvec() {
    let nodes = icosahedral_sphere_nodes(2).unwrap();
    let (op, _) = assemble_laplacian(&nodes, 9, EpsilonStrategy::FixedEpsilon(2.0)).unwrap();
    let perm = rcm_order(&op);
    let permuted = op.apply_permutation(&perm);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u: Vec<f64> = (0..op.dim()).map(|_| rng.random::<f64>() - 0.5).collect();
    let pu: Vec<f64> = perm.iter().map(|&old| u[old]).collect();

    let left = permuted.matvec_alloc(&pu);
    let lu = op.matvec_alloc(&u);
    let right: Vec<f64> = perm.iter().map(|&old| lu[old]).collect();
    let scale = right.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, b) in left.iter().zip(&right) {
        assert!((a - b).abs() <= 1e-13 * scale, "{a} vs {b}");
    }
}

#[test]
fn scaled_add_identity_shifts_the_diagonal() {
    let nodes = icosahedral_sphere_nodes(1).unwrap();
    let (op, _) = assemble_laplacian(&nodes, 7, EpsilonStrategy::FixedEpsilon(2.0)).unwrap();
    let shifted = op.scaled_add_identity(3.0, -0.5);
    let dense = op.to_dense();
    let expect = nalgebra::DMatrix::identity(op.dim(), op.dim()) * 3.0 + dense * (-0.5);
    assert!((shifted.to_dense() - expect).amax() < 1e-14);
}

#[test]
fn matrix_market_output_is_one_based_coordinate() {
    let op = SparseOperator::from_rows(2, vec![vec![(0, 1.5)], vec![(0, -2.0), (1, 4.0)]]);
    let mut buf = Vec::new();
    op.write_matrix_market(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "%%MatrixMarket matrix coordinate real general");
    assert_eq!(lines[1], "2 2 3");
    assert_eq!(lines[2], "1 1 1.5e0");
    assert_eq!(lines[3], "2 1 -2e0");
    assert_eq!(lines[4], "2 2 4e0");
}

#[test]
fn spectral_abscissa_of_negated_identity() {
    let op = diagonal_operator(&[-1.0; 25]);
    let est = spectral_abscissa(&op, SpectralMode::DenseExact).unwrap();
    assert!((est.abscissa - (-1.0)).abs() < 1e-12);
    assert!((est.radius - 1.0).abs() < 1e-12);
}

#[test]
fn spectral_abscissa_finds_lone_positive_diagonal_entry() {
    let mut diag = vec![-1.0; 30];
    diag[17] = 5.0;
    let op = diagonal_operator(&diag);
    let est = spectral_abscissa(&op, SpectralMode::DenseExact).unwrap();
    assert!((est.abscissa - 5.0).abs() < 1e-12);
}

#[test]
fn dense_mode_rejects_large_operators() {
    let op = diagonal_operator(&vec![-1.0; 4001]);
    assert!(matches!(
        spectral_abscissa(&op, SpectralMode::DenseExact),
        Err(OperatorError::DenseTooLarge(4001))
    ));
}

#[test]
fn arnoldi_matches_dense_on_sphere_operator() {
    let nodes = icosahedral_sphere_nodes(3).unwrap();
    let (op, _) = assemble_laplacian(&nodes, 11, EpsilonStrategy::PerStencilKappa(1e6)).unwrap();
    let dense = spectral_abscissa(&op, SpectralMode::DenseExact).unwrap();
    let arnoldi = spectral_abscissa(&op, SpectralMode::ArnoldiEstimate).unwrap();
    assert!(
        (arnoldi.abscissa - dense.abscissa).abs() <= 1e-6 * dense.radius,
        "arnoldi {} vs dense {} (radius {})",
        arnoldi.abscissa,
        dense.abscissa,
        dense.radius
    );
    // The stable operator keeps its eigenvalues in the left half plane, up
    // to the near-null constant mode.
    assert!(dense.abscissa <= 1e-8 * dense.radius);
}

#[test]
fn diagnostics_bundles_structure_and_spectrum() {
    let nodes = icosahedral_sphere_nodes(2).unwrap();
    let (op, _) = assemble_laplacian(&nodes, 9, EpsilonStrategy::PerStencilKappa(1e6)).unwrap();
    let d = diagnostics(&op, SpectralMode::DenseExact).unwrap();
    assert!((d.density - 9.0 / nodes.len() as f64).abs() < 1e-15);
    assert!(d.bandwidth_after <= d.bandwidth_before);
    assert!(d.spectral.abscissa <= 1e-8 * d.spectral.radius);
}

#[test]
fn sphere_harmonic_eigenvector_error_shrinks_with_refinement() {
    // Delta_M z = -2 z on the unit sphere: apply the assembled operator to
    // the coordinate field z across two refinement levels.
    let mut errors = Vec::new();
    for level in [2u32, 3] {
        let nodes = icosahedral_sphere_nodes(level).unwrap();
        let (op, _) = assemble_laplacian(&nodes, 17, EpsilonStrategy::FixedEpsilon(1.0)).unwrap();
        let z: Vec<f64> = nodes.points().iter().map(|p| p.z).collect();
        let lz = op.matvec_alloc(&z);
        let err = lz
            .iter()
            .zip(&z)
            .map(|(l, zi)| (l + 2.0 * zi).abs())
            .fold(0.0f64, f64::max);
        errors.push(err);
    }
    assert!(errors[1] < errors[0], "errors: {errors:?}");
}

#[test]
fn vec3_is_send_sync_for_parallel_assembly() {
    fn check<T: Send + Sync>() {}
    check::<Vec3>();
    check::<SparseOperator>();
}
