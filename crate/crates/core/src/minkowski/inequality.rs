//! Boundary integral `∫_{∂Ω} |∇u|^{k+β} σ_{k−1}(∂Ω)` against its `γ` lower bound.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::Serialize;

use super::interp::FieldInterpolant;
use super::level::DEFAULT_NODES;
use super::{check_beta, radial_phi, sphere_area};
use crate::barriers::alpha0;
use crate::error::{Error, Result};
use crate::geometry::{boundary_curvature, RadialSurface};
use crate::solver::{asymptotics_report, SolutionField};

/// Relative gap below which the equality case is reported.
pub const EQUALITY_TOL: f64 = 0.015;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub n: usize,
    pub k: usize,
    pub beta: f64,
    pub gamma: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub rel_gap: f64,
    pub equality: bool,
    pub tolerance: f64,
    /// `β = n − 2k`: the bound does not depend on `γ`.
    pub gamma_free: bool,
    pub grid: [usize; 2],
    pub r_outer: f64,
    pub eps: f64,
}

/// `∫_{∂Ω} |∇u|^{k+β} σ_{k−1}(∂Ω) dA` with `|∇u|` from the field on the inner boundary.
pub fn boundary_integral(field: &SolutionField, surface: &RadialSurface, beta: f64) -> Result<f64> {
    let g = &field.grid;
    if &g.surface != surface {
        return Err(Error::Precondition("field was solved on a different domain".into()));
    }
    let (n, k) = (g.n, g.k);
    let interp = FieldInterpolant::new(field);
    let rule = GaussLegendre::new(NonZeroUsize::new(DEFAULT_NODES).expect("positive"));
    let omega = sphere_area(n - 2);
    let mut total = 0.0;
    for &(x, w) in rule.as_node_weight_pairs() {
        let t = 0.5 * PI * (x + 1.0);
        let d = interp.eval(0.0, t);
        let rho = surface.rho(t);
        let grad = d[1].hypot(d[2] / rho);
        let sigma = boundary_curvature(surface, t, k)?.sigma_km1;
        let dl = rho.hypot(surface.rho_prime(t));
        total += 0.5 * PI * w * omega * (rho * t.sin()).powi(n as i32 - 2) * dl * grad.powf(k as f64 + beta) * sigma;
    }
    Ok(total)
}

/// Report with `γ` from the field's asymptotic fit.
pub fn minkowski_report(field: &SolutionField, surface: &RadialSurface, beta: f64) -> Result<InequalityReport> {
    let fit = asymptotics_report(field)?.gamma;
    minkowski_report_with_gamma(field, surface, beta, fit.affine)
}

pub fn minkowski_report_with_gamma(
    field: &SolutionField,
    surface: &RadialSurface,
    beta: f64,
    gamma: f64,
) -> Result<InequalityReport> {
    let g = &field.grid;
    let (n, k) = (g.n, g.k);
    check_beta(n, k, beta)?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Precondition(format!("no usable γ (got {gamma})")));
    }
    let lhs = boundary_integral(field, surface, beta)?;
    let rhs = radial_phi(n, k, beta, gamma);
    let gap = lhs - rhs;
    let rel_gap = gap / rhs;
    Ok(InequalityReport {
        n,
        k,
        beta,
        gamma,
        lhs,
        rhs,
        gap,
        rel_gap,
        equality: rel_gap.abs() <= EQUALITY_TOL,
        tolerance: EQUALITY_TOL,
        gamma_free: (k as f64 - beta / alpha0(n, k)).abs() < 1e-12,
        grid: [g.ns, g.ntheta],
        r_outer: g.r_outer,
        eps: g.eps,
    })
}
