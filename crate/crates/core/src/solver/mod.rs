//! Radial and axisymmetric solvers for the approximate problem
//! `S_k(D²u) = f_ε` in `B_R ∖ Ω̄`, plus asymptotic diagnostics.

mod axisym;
mod config;
mod continuation;
mod field;
mod grid;
mod newton;
mod radial;
mod report;
pub mod stencil;

pub use axisym::{field_residual, solve_axisym, InitialGuess};
pub use config::SolverConfig;
pub use continuation::{continuation_solve, coupled_eps_schedule, stage_schedule, ContinuationResult, Richardson, StageSummary};
pub use field::{SolutionField, DUMP_MAGIC};
pub use grid::AnnulusGrid;
pub use newton::NewtonOptions;
pub use radial::{ball_problem, continuation_radial, solve_radial, solve_radial_problem, RadialSolution};
pub use report::{
    asymptotics_report, field_columns, fit_asymptotics, Asymptotics, Column, DecayFit, GammaFit, GradientBand,
    SolveReport, BAND_SLACK, SANDWICH_SLACK,
};

use crate::barriers::alpha0;

pub(crate) fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Natural size of `S_m` near radius `r`: `C(n, m)(α₀ r^{−α₀−2})^m`.
pub(crate) fn sigma_scale(n: usize, k: usize, m: usize, r: f64) -> f64 {
    let a0 = alpha0(n, k);
    binom(n, m) * (a0 * r.powf(-a0 - 2.0)).powi(m as i32)
}
