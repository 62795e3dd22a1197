//! Numerical laboratory for the degenerate k-Hessian equation
//! `S_k(D²u) = 0` outside a star-shaped, (k−1)-convex domain, with `u = −1`
//! on the boundary and `u → 0` at infinity.
//!
//! Modules, bottom-up:
//! - [`symfun`]: elementary symmetric functions, Newton tensors, Gårding cones,
//!   Kato and Newton–Maclaurin gaps.
//! - [`geometry`]: spherical Hessians, curvature of radial graphs and the
//!   `g = r/ρ` subsolution.
//! - [`barriers`]: radial model solutions, the barrier family `φ(x, C)` and
//!   the approximate Dirichlet problem data.
//! - [`solver`]: radial and axisymmetric damped-Newton solvers plus
//!   asymptotic diagnostics.
//! - [`minkowski`]: level sets, the monotone quantity `Φ(τ)` and the
//!   Minkowski-type inequality report.

pub mod barriers;
pub mod error;
pub mod geometry;
pub mod minkowski;
pub mod solver;
pub mod symfun;

pub use error::{Error, Result};
