//! Mesh-free discretization of the Laplace-Beltrami operator on closed
//! surfaces, built from RBF-generated finite differences, together with the
//! time integrators needed to solve diffusion and reaction-diffusion
//! equations on those surfaces.
//!
//! The pipeline is: sample a surface ([`geometry`]), build per-node stencils
//! from a k-d tree, compute a local surface-Laplacian weight row on each
//! stencil ([`rbf`]) with a per-stencil shape parameter tuned to a target
//! condition number ([`shape_param`]), assemble the rows into a sparse
//! operator ([`operator`]), and advance the resulting ODE system in time
//! ([`timestepping`]). Exact solutions, forcings and reaction terms for the
//! shipped test problems live in [`problems`].

pub mod geometry;
pub mod rbf;
pub mod operator;
pub mod problems;
pub mod shape_param;
pub mod timestepping;

/// 3-vector used throughout for points and normals.
pub type Vec3 = nalgebra::Vector3<f64>;
