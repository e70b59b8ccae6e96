//! Manufactured forced diffusion on the torus
//! `(1 - sqrt(x^2+y^2))^2 + z^2 = 1/9`, specified in intrinsic angles.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Vec3;

use super::ProblemsError;

use super::sphere::TEMPORAL_DECAY;

/// Azimuthal decay rate of the bump solution.
pub const TORUS_A: f64 = 9.0;
/// Poloidal decay rate.
pub const TORUS_B: f64 = 3.0;
/// Number of randomly placed bump centers.
pub const CENTER_COUNT: usize = 23;

/// Recovers the intrinsic angles `(phi, lambda)` of a torus surface point.
pub fn torus_intrinsic_coords(x: &Vec3) -> Result<(f64, f64), ProblemsError> {
    let rho = x.x.hypot(x.y);
    let residual = ((1.0 - rho).powi(2) + x.z * x.z - 1.0 / 9.0).abs();
    if residual > 1e-8 {
        return Err(ProblemsError::OffSurface { residual });
    }
    let lambda = x.y.atan2(x.x);
    let phi = (3.0 * x.z).atan2(3.0 * (rho - 1.0));
    Ok((phi, lambda))
}

/// Manufactured solution
/// `u(t, phi, lambda) = e^{-5t} sum_k e^{-a^2(1-cos(lambda-lambda_k)) - b^2(1-cos(phi-phi_k))}`
/// with seeded random centers in `[-pi, pi]^2`.
#[derive(Debug, Clone)]
pub struct ForcedTorusSolution {
    centers: Vec<(f64, f64)>,
    pub seed: u64,
}

impl ForcedTorusSolution {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centers = (0..CENTER_COUNT)
            .map(|_| {
                (
                    (rng.random::<f64>() * 2.0 - 1.0) * std::f64::consts::PI,
                    (rng.random::<f64>() * 2.0 - 1.0) * std::f64::consts::PI,
                )
            })
            .collect();
        ForcedTorusSolution { centers, seed }
    }

    pub fn centers(&self) -> &[(f64, f64)] {
        &self.centers
    }

    /// Time-independent bump sum `U0(phi, lambda)`.
    pub fn bump_sum(&self, phi: f64, lambda: f64) -> f64 {
        self.centers
            .iter()
            .map(|&(phi_k, lambda_k)| {
                (-TORUS_A * TORUS_A * (1.0 - (lambda - lambda_k).cos())
                    - TORUS_B * TORUS_B * (1.0 - (phi - phi_k).cos()))
                .exp()
            })
            .sum()
    }

    pub fn value(&self, t: f64, phi: f64, lambda: f64) -> f64 {
        (-TEMPORAL_DECAY * t).exp() * self.bump_sum(phi, lambda)
    }

    /// Intrinsic surface Laplacian of `U0` on this torus:
    /// `Delta f = f_ll / ring^2 + 9 (ring f_p)_p / ring` with
    /// `ring = 1 + cos(phi)/3`, applied termwise in closed form.
    pub fn bump_laplacian(&self, phi: f64, lambda: f64) -> f64 {
        let ring = 1.0 + phi.cos() / 3.0;
        let dring = -phi.sin() / 3.0;
        let a2 = TORUS_A * TORUS_A;
        let b2 = TORUS_B * TORUS_B;
        self.centers
            .iter()
            .map(|&(phi_k, lambda_k)| {
                let dl = lambda - lambda_k;
                let dp = phi - phi_k;
                let s = (-a2 * (1.0 - dl.cos()) - b2 * (1.0 - dp.cos())).exp();
                // Azimuthal part: S_ll = (a^4 sin^2 - a^2 cos) S.
                let s_ll = (a2 * a2 * dl.sin().powi(2) - a2 * dl.cos()) * s;
                // Poloidal: S_p = -b^2 sin(dp) S, S_pp = (b^4 sin^2 - b^2 cos) S.
                let s_p = -b2 * dp.sin() * s;
                let s_pp = (b2 * b2 * dp.sin().powi(2) - b2 * dp.cos()) * s;
                s_ll / (ring * ring) + 9.0 * (s_pp + s_p * dring / ring)
            })
            .sum()
    }

    /// Forcing `f = du/dt - delta * Delta_M u` maintaining the solution.
    pub fn forcing(&self, t: f64, phi: f64, lambda: f64, delta: f64) -> f64 {
        (-TEMPORAL_DECAY * t).exp()
            * (-TEMPORAL_DECAY * self.bump_sum(phi, lambda)
                - delta * self.bump_laplacian(phi, lambda))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::torus_point;

    #[test]
    fn outer_equator_maps_to_zero_angles() {
        let (phi, lambda) = torus_intrinsic_coords(&Vec3::new(4.0 / 3.0, 0.0, 0.0)).unwrap();
        assert_eq!(phi, 0.0);
        assert_eq!(lambda, 0.0);
    }

    #[test]
    fn intrinsic_coordinates_round_trip() {
        for i in 0..12 {
            for j in 0..12 {
                let phi = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / 12.0;
                let lambda = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / 12.0;
                let p = torus_point(phi, lambda);
                let (phi2, lambda2) = torus_intrinsic_coords(&p).unwrap();
                let wrap = |a: f64| {
                    let mut d = a % (2.0 * std::f64::consts::PI);
                    if d > std::f64::consts::PI {
                        d -= 2.0 * std::f64::consts::PI;
                    }
                    if d < -std::f64::consts::PI {
                        d += 2.0 * std::f64::consts::PI;
                    }
                    d
                };
                assert!(wrap(phi2 - phi).abs() < 1e-12, "phi {phi} -> {phi2}");
                assert!(wrap(lambda2 - lambda).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn off_surface_points_are_rejected() {
        let err = torus_intrinsic_coords(&Vec3::new(2.0, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, ProblemsError::OffSurface { .. }));
    }

    #[test]
    fn solution_is_separable_in_time_and_seeded() {
        let s = ForcedTorusSolution::new(3);
        assert_eq!(s.centers().len(), CENTER_COUNT);
        assert_eq!(s.centers(), ForcedTorusSolution::new(3).centers());
        let ratio = s.value(0.4, 0.7, -1.1) / s.value(0.0, 0.7, -1.1);
        assert!((ratio - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn analytic_laplacian_matches_finite_differences_of_intrinsic_formula() {
        // Second-order centered differences of the intrinsic-coordinate
        // Laplacian at h = 1e-4.
        let s = ForcedTorusSolution::new(5);
        let h = 1e-4;
        for &(phi, lambda) in &[(0.3f64, 1.2f64), (-2.0, 0.4), (1.9, -2.7), (0.0, 0.0)] {
            let ring = 1.0 + phi.cos() / 3.0;
            let u = |p: f64, l: f64| s.bump_sum(p, l);
            let u_ll = (u(phi, lambda + h) - 2.0 * u(phi, lambda) + u(phi, lambda - h)) / (h * h);
            // (ring(p) u_p)_p expanded by product differences.
            let ring_at = |p: f64| 1.0 + p.cos() / 3.0;
            let flux = |p: f64| ring_at(p) * (u(p + h, lambda) - u(p - h, lambda)) / (2.0 * h);
            let div = (flux(phi + h) - flux(phi - h)) / (2.0 * h);
            let fd = u_ll / (ring * ring) + 9.0 * div / ring;
            let analytic = s.bump_laplacian(phi, lambda);
            assert!(
                (fd - analytic).abs() <= 1e-6 * analytic.abs().max(1.0),
                "({phi}, {lambda}): fd {fd} vs analytic {analytic}"
            );
        }
    }

    #[test]
    fn manufactured_identity_holds_pointwise() {
        let s = ForcedTorusSolution::new(9);
        let delta = 1.3;
        for &(phi, lambda, t) in &[(0.2, 0.9, 0.1), (-1.4, 2.2, 0.7), (3.0, -3.0, 0.0)] {
            let dudt = -TEMPORAL_DECAY * s.value(t, phi, lambda);
            let lap = (-TEMPORAL_DECAY * t).exp() * s.bump_laplacian(phi, lambda);
            let f = s.forcing(t, phi, lambda, delta);
            let residual = dudt - delta * lap - f;
            let scale = dudt.abs().max(lap.abs()).max(f.abs()).max(1e-300);
            assert!(residual.abs() <= 1e-8 * scale);
        }
    }
}
