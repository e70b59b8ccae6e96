//! The two-species activator-inhibitor system and its published parameter
//! presets.

use super::ProblemsError;

/// Reaction coefficients and diffusivities of the Turing system.
#[derive(Debug, Clone, PartialEq)]
pub struct TuringParams {
    pub delta_u: f64,
    pub delta_v: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub final_time: f64,
}

impl TuringParams {
    /// Builds parameters from the inhibitor diffusivity with the standard
    /// ratio `delta_u = 0.516 delta_v` and the shared reaction constants.
    pub fn from_delta_v(delta_v: f64, tau1: f64, tau2: f64, final_time: f64) -> Self {
        TuringParams {
            delta_u: 0.516 * delta_v,
            delta_v,
            alpha: 0.899,
            beta: -0.91,
            gamma: -0.899,
            tau1,
            tau2,
            final_time,
        }
    }

    /// Looks up a named preset, e.g. `rbc/spots`.
    pub fn preset(name: &str) -> Result<TuringParams, ProblemsError> {
        TURING_PRESETS
            .iter()
            .find(|(preset_name, _)| *preset_name == name)
            .map(|(_, p)| p.clone())
            .ok_or_else(|| ProblemsError::UnknownPreset(name.to_string()))
    }
}

/// Published surface/pattern presets. Spot patterns use `tau1 = 0.02`,
/// `tau2 = 0.2`; stripe patterns `tau1 = 3.5`, `tau2 = 0`.
pub const TURING_PRESETS: &[(&str, TuringParams)] = &[
    ("rbc/spots", preset(4.5e-3, 0.02, 0.2, 800.0)),
    ("rbc/stripes", preset(2.1e-3, 3.5, 0.0, 6500.0)),
    ("bumpy-sphere/spots", preset(4.5e-3, 0.02, 0.2, 800.0)),
    ("bumpy-sphere/stripes", preset(2.1e-3, 3.5, 0.0, 7000.0)),
    ("double-torus/spots", preset(2.1e-3, 0.02, 0.2, 700.0)),
    ("double-torus/stripes", preset(8.87e-4, 3.5, 0.0, 6000.0)),
    ("frog/spots", preset(2.87e-4, 0.02, 0.2, 600.0)),
    ("bunny/stripes", preset(2.87e-4, 3.5, 0.0, 6000.0)),
    // Artifact presets for the directly generated surfaces.
    ("sphere/spots", preset(4.5e-3, 0.02, 0.2, 800.0)),
    ("torus/spots", preset(2.1e-3, 0.02, 0.2, 800.0)),
];

const fn preset(delta_v: f64, tau1: f64, tau2: f64, final_time: f64) -> TuringParams {
    TuringParams {
        delta_u: 0.516 * delta_v,
        delta_v,
        alpha: 0.899,
        beta: -0.91,
        gamma: -0.899,
        tau1,
        tau2,
        final_time,
    }
}

/// Reaction terms of the activator-inhibitor system (diffusion excluded):
/// `du = alpha u (1 - tau1 v^2) + v (1 - tau2 u)`,
/// `dv = beta v (1 + (alpha tau1 / beta) u v) + u (gamma + tau2 v)`.
pub fn turing_reaction(u: f64, v: f64, params: &TuringParams) -> Result<(f64, f64), ProblemsError> {
    if params.beta == 0.0 && params.tau1 != 0.0 {
        return Err(ProblemsError::UndefinedReaction { tau1: params.tau1 });
    }
    let coupling = if params.tau1 == 0.0 {
        0.0
    } else {
        params.alpha * params.tau1 / params.beta
    };
    let du = params.alpha * u * (1.0 - params.tau1 * v * v) + v * (1.0 - params.tau2 * u);
    let dv = params.beta * v * (1.0 + coupling * u * v) + u * (params.gamma + params.tau2 * v);
    Ok((du, dv))
}
