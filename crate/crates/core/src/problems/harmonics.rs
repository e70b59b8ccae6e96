//! Real orthonormal spherical harmonics via the fully-normalized associated
//! Legendre recurrence.

use crate::Vec3;

use super::ProblemsError;

/// Fully normalized associated Legendre value `N_l^m P_l^m(cos theta)`,
/// built by the sectoral seed followed by the upward degree recurrence.
/// Stable for degrees well beyond the 30 used here.
fn normalized_legendre(l: u32, m: u32, cos_theta: f64, sin_theta: f64) -> f64 {
    // Sectoral seed: P~_m^m.
    let mut pmm = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
    for k in 1..=m {
        pmm *= ((2.0 * k as f64 + 1.0) / (2.0 * k as f64)).sqrt() * sin_theta;
    }
    if l == m {
        return pmm;
    }
    // P~_{m+1}^m.
    let mut prev = pmm;
    let mut curr = (2.0 * m as f64 + 3.0).sqrt() * cos_theta * pmm;
    if l == m + 1 {
        return curr;
    }
    for deg in (m + 2)..=l {
        let lf = deg as f64;
        let mf = m as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
            .sqrt();
        let next = a * (cos_theta * curr - b * prev);
        prev = curr;
        curr = next;
    }
    curr
}

/// Real spherical harmonic of degree `l` and order `m`, orthonormal under
/// the standard surface measure: positive orders carry `sqrt(2) cos(m phi)`,
/// negative orders `sqrt(2) sin(|m| phi)`.
pub fn real_spherical_harmonic(l: u32, m: i32, x: &Vec3) -> Result<f64, ProblemsError> {
    if m.unsigned_abs() > l {
        return Err(ProblemsError::InvalidOrder { l, m });
    }
    let cos_theta = x.z.clamp(-1.0, 1.0);
    let sin_theta = x.x.hypot(x.y);
    let phi = x.y.atan2(x.x);
    let am = m.unsigned_abs();
    let base = normalized_legendre(l, am, cos_theta, sin_theta);
    Ok(match m.signum() {
        0 => base,
        1 => std::f64::consts::SQRT_2 * base * (am as f64 * phi).cos(),
        _ => std::f64::consts::SQRT_2 * base * (am as f64 * phi).sin(),
    })
}

/// Sectoral harmonic `Y_ll` along an increasing-degree sweep: the iterator
/// yields `Y_11, Y_22, ...` at the same point without recomputing the seed.
pub(crate) struct SectoralSweep {
    sin_theta: f64,
    cos_mphi_prev: f64,
    sin_mphi_prev: f64,
    cos_phi: f64,
    sin_phi: f64,
    pmm: f64,
    m: u32,
}

impl SectoralSweep {
    pub fn new(x: &Vec3) -> Self {
        let sin_theta = x.x.hypot(x.y);
        let phi = x.y.atan2(x.x);
        SectoralSweep {
            sin_theta,
            cos_mphi_prev: 1.0,
            sin_mphi_prev: 0.0,
            cos_phi: phi.cos(),
            sin_phi: phi.sin(),
            pmm: (1.0 / (4.0 * std::f64::consts::PI)).sqrt(),
            m: 0,
        }
    }
}

impl Iterator for SectoralSweep {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        self.m += 1;
        let k = self.m as f64;
        self.pmm *= ((2.0 * k + 1.0) / (2.0 * k)).sqrt() * self.sin_theta;
        // Angle addition for cos(m phi).
        let cos_mphi = self.cos_mphi_prev * self.cos_phi - self.sin_mphi_prev * self.sin_phi;
        let sin_mphi = self.sin_mphi_prev * self.cos_phi + self.cos_mphi_prev * self.sin_phi;
        self.cos_mphi_prev = cos_mphi;
        self.sin_mphi_prev = sin_mphi;
        Some(std::f64::consts::SQRT_2 * self.pmm * cos_mphi)
    }
}
