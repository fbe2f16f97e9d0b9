//! Diffraction of a plane E-polarized wave by a transversely inhomogeneous
//! dielectric layer with a Kerr-type (cubic) nonlinearity.
//!
//! The layer occupies `|z| <= d` and has permittivity
//! `eps_L(z) + alpha * |U(z)|^2`. The total field `U` inside the layer solves
//! the nonlinear Fredholm equation of the second kind
//!
//! ```text
//! U(z) + s0 * ∫ exp(iΓ|z - z0|) [1 - eps_L(z0) - alpha |U(z0)|^2] U(z0) dz0 = U_inc(z)
//! ```
//!
//! with `s0 = iκ²/(2Γ)`. The crate provides
//!
//! * [`model`]: parameters, permittivity profiles, grids and solutions,
//! * [`quadrature`]: diagonal-split Nyström quadrature,
//! * [`operators`]: the linear, lossy and cubic integral operators and the fixed-point map,
//! * [`contraction`]: sufficient solvability bounds (contraction radii and rates),
//! * [`solver`]: Picard and coupled (frozen-coefficient) iterations, amplitudes, flux,
//! * [`oracle`]: closed-form trigonometric-polynomial images and the homogeneous-slab formula,
//! * [`bvp`]: the equivalent semilinear boundary value problem solved by damped Newton,
//! * [`config`], [`cli`] and [`validate`]: file-driven runs behind the `kerrslab` binary.

pub mod bvp;
pub mod cli;
pub mod config;
pub mod contraction;
pub mod error;
pub mod linalg;
pub mod model;
pub mod operators;
pub mod oracle;
pub mod quadrature;
pub mod solver;
pub mod trig;
pub mod validate;

pub use error::{Error, Result};
pub use model::{FieldSolution, Grid, PermittivityProfile, ProblemParams};
pub use num_complex::Complex64;
