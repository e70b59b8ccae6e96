//! Exact solutions on the unit sphere: the sectoral-harmonic heat series
//! and the manufactured forced-diffusion solution built from geodesic bumps.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Vec3;

use super::harmonics::SectoralSweep;

/// Heat-equation solution `u(t) = (20/(3 pi)) sum_l e^{-l^2/9} e^{-t l(l+1)} Y_ll`.
#[derive(Debug, Clone)]
pub struct SphereHeatSolution {
    pub truncation: u32,
    pub amplitude: f64,
}

impl Default for SphereHeatSolution {
    fn default() -> Self {
        SphereHeatSolution {
            truncation: 30,
            amplitude: 20.0 / (3.0 * std::f64::consts::PI),
        }
    }
}

impl SphereHeatSolution {
    pub fn with_truncation(truncation: u32) -> Self {
        SphereHeatSolution {
            truncation,
            ..Default::default()
        }
    }

    /// Solution value at time `t` and unit-sphere point `x`.
    pub fn value(&self, t: f64, x: &Vec3) -> f64 {
        let mut sum = 0.0;
        for (i, y_ll) in SectoralSweep::new(x).take(self.truncation as usize).enumerate() {
            let l = (i + 1) as f64;
            sum += (-l * l / 9.0).exp() * (-t * l * (l + 1.0)).exp() * y_ll;
        }
        self.amplitude * sum
    }

    /// Surface Laplacian of the solution, termwise `-l(l+1)` on each mode.
    pub fn laplacian(&self, t: f64, x: &Vec3) -> f64 {
        let mut sum = 0.0;
        for (i, y_ll) in SectoralSweep::new(x).take(self.truncation as usize).enumerate() {
            let l = (i + 1) as f64;
            sum += -l * (l + 1.0) * (-l * l / 9.0).exp() * (-t * l * (l + 1.0)).exp() * y_ll;
        }
        self.amplitude * sum
    }
}

/// Temporal decay rate of the manufactured solutions.
pub const TEMPORAL_DECAY: f64 = 5.0;
/// Spatial decay rate of the geodesic bumps.
pub const SPATIAL_DECAY: f64 = 10.0;
/// Number of randomly placed bump centers.
pub const CENTER_COUNT: usize = 23;

/// Manufactured forced-diffusion solution
/// `u(t, x) = e^{-5t} sum_k e^{-10 (1 - xi_k . x)}`
/// with seeded random centers `xi_k` on the sphere.
///
/// The bump argument `1 - xi . x = (geodesic distance)^2 / 2 + O(theta^4)`
/// makes each summand a smooth Gaussian-like bell; a bump written directly
/// in the geodesic distance would have a conical point at its center, which
/// caps the attainable convergence order of any consistency test built on
/// it.
#[derive(Debug, Clone)]
pub struct ForcedSphereSolution {
    centers: Vec<Vec3>,
    pub seed: u64,
}

impl ForcedSphereSolution {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut centers = Vec::with_capacity(CENTER_COUNT);
        while centers.len() < CENTER_COUNT {
            let v = Vec3::new(
                gaussian(&mut rng),
                gaussian(&mut rng),
                gaussian(&mut rng),
            );
            let n = v.norm();
            if n > 1e-6 {
                centers.push(v / n);
            }
        }
        ForcedSphereSolution { centers, seed }
    }

    pub fn centers(&self) -> &[Vec3] {
        &self.centers
    }

    /// Time-independent bump sum `U0(x)`; the solution is `e^{-5t} U0`.
    pub fn bump_sum(&self, x: &Vec3) -> f64 {
        self.centers
            .iter()
            .map(|c| (SPATIAL_DECAY * (c.dot(x) - 1.0)).exp())
            .sum()
    }

    pub fn value(&self, t: f64, x: &Vec3) -> f64 {
        (-TEMPORAL_DECAY * t).exp() * self.bump_sum(x)
    }

    /// Surface Laplacian of `U0`. Each bump depends only on the geodesic
    /// distance theta to its center through `g = e^{c (cos theta - 1)}`, so
    /// `Delta_M g = g'' + cot(theta) g' = g (c^2 sin^2 theta - 2 c cos theta)`
    /// with `cos theta = xi . x`.
    pub fn bump_laplacian(&self, x: &Vec3) -> f64 {
        let c = SPATIAL_DECAY;
        self.centers
            .iter()
            .map(|center| {
                let s = center.dot(x).clamp(-1.0, 1.0);
                let g = (c * (s - 1.0)).exp();
                g * (c * c * (1.0 - s * s) - 2.0 * c * s)
            })
            .sum()
    }

    /// Forcing `f = du/dt - delta * Delta_M u` that maintains the solution.
    pub fn forcing(&self, t: f64, x: &Vec3, delta: f64) -> f64 {
        (-TEMPORAL_DECAY * t).exp()
            * (-TEMPORAL_DECAY * self.bump_sum(x) - delta * self.bump_laplacian(x))
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller from two uniforms.
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
