//! Level sets of solved fields, the monotone quantity `Φ(τ)` and the
//! weighted Minkowski-type inequality for `∂Ω`.

mod inequality;
mod interp;
mod level;
mod phi;

pub use inequality::{boundary_integral, minkowski_report, minkowski_report_with_gamma, InequalityReport, EQUALITY_TOL};
pub use interp::{FieldInterpolant, PointDerivs};
pub use level::{extract_level_set, extract_level_set_with, LevelPoint, LevelSet, DEFAULT_NODES, REGULAR_FRACTION};
pub use phi::{default_levels, phi_of_tau, phi_series, phi_series_with, PhiSample, PhiSeries, PhiValue, AGREEMENT_TOL};

use crate::barriers::alpha0;
use crate::error::{Error, Result};

/// Area of the unit sphere `S^m ⊂ ℝ^{m+1}`.
pub fn sphere_area(m: usize) -> f64 {
    use std::f64::consts::PI;
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m - 1) as f64 * sphere_area(m - 2),
    }
}

/// `l = (n−k)/(n−2k)`.
pub fn l_exponent(n: usize, k: usize) -> f64 {
    (n - k) as f64 / (n as f64 - 2.0 * k as f64)
}

/// Smallest admissible weight exponent, `(n−2k)/(n−k)`.
pub fn beta_threshold(n: usize, k: usize) -> f64 {
    (n as f64 - 2.0 * k as f64) / (n - k) as f64
}

pub fn check_beta(n: usize, k: usize, beta: f64) -> Result<()> {
    let min = beta_threshold(n, k);
    if !(beta >= min - 1e-12) {
        return Err(Error::Rejected(format!(
            "β = {beta} violates the monotonicity hypothesis β ≥ (n−2k)/(n−k) = {min:.6} for n = {n}, k = {k}"
        )));
    }
    Ok(())
}

/// `|S^{n−1}| C(n−1,k−1) α₀^{k+β} γ^{k−β/α₀}`: the value of `Φ` for `u = γμ`,
/// and the right-hand side of the boundary inequality.
pub fn radial_phi(n: usize, k: usize, beta: f64, gamma: f64) -> f64 {
    let a0 = alpha0(n, k);
    let binom = (0..k - 1).fold(1.0, |acc, i| acc * (n - 1 - i) as f64 / (i + 1) as f64);
    sphere_area(n - 1) * binom * a0.powf(k as f64 + beta) * gamma.powf(k as f64 - beta / a0)
}
