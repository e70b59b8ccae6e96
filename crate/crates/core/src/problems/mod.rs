//! Exact solutions, forcing functions and reaction terms for the shipped
//! test problems: heat flow on the sphere, forced diffusion on the sphere
//! and torus, and the two-species activator-inhibitor system.

use thiserror::Error;

mod harmonics;
mod sphere;
mod torus;
mod turing;

pub use harmonics::real_spherical_harmonic;
pub use sphere::{ForcedSphereSolution, SphereHeatSolution};
pub use torus::{torus_intrinsic_coords, ForcedTorusSolution};
pub use turing::{turing_reaction, TuringParams, TURING_PRESETS};

#[derive(Debug, Error)]
pub enum ProblemsError {
    #[error("spherical harmonic order |{m}| exceeds degree {l}")]
    InvalidOrder { l: u32, m: i32 },
    #[error("point violates the torus implicit equation by {residual:.3e}")]
    OffSurface { residual: f64 },
    #[error("reaction undefined: beta = 0 with tau1 = {tau1}")]
    UndefinedReaction { tau1: f64 },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}
