//! `Φ(τ)` on level sets and its sampled series.

use std::fmt::Write as _;

use serde::Serialize;

use super::interp::FieldInterpolant;
use super::level::{extract_level_set_with, LevelSet, DEFAULT_NODES};
use super::{check_beta, l_exponent, radial_phi};
use crate::barriers::alpha0;
use crate::error::{Error, Result};
use crate::solver::{asymptotics_report, SolutionField};

/// Allowed relative disagreement between the Newton-tensor and curvature evaluations.
pub const AGREEMENT_TOL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiValue {
    pub tau: f64,
    pub level: f64,
    /// Newton-tensor evaluation.
    pub phi: f64,
    /// `|Du|^k σ_{k−1}(κ_level)` evaluation.
    pub phi_frame: f64,
    pub rel_disagreement: f64,
    pub flagged: bool,
    pub min_grad: f64,
}

fn phi_on(set: &LevelSet, tau: f64, beta: f64) -> PhiValue {
    let (n, k) = (set.n, set.k);
    let l = l_exponent(n, k);
    let denom = (-set.level).powf(l);
    let (mut a, mut b) = (0.0, 0.0);
    for (p, w) in set.points.iter().zip(&set.weights) {
        let weight = (p.grad_norm / denom).powf(beta);
        a += w * p.rot_weight * p.dl * p.newton_form / p.grad_norm * weight;
        b += w * p.rot_weight * p.dl_fit * p.grad_norm.powi(k as i32) * p.sigma_km1 * weight;
    }
    let rel = (a - b).abs() / a.abs().max(f64::MIN_POSITIVE);
    PhiValue {
        tau,
        level: set.level,
        phi: a,
        phi_frame: b,
        rel_disagreement: rel,
        flagged: rel > AGREEMENT_TOL,
        min_grad: set.min_grad,
    }
}

fn check_tau(tau: f64) -> Result<f64> {
    if !(tau <= -1.0) {
        return Err(Error::Domain(format!("τ = {tau} must be ≤ −1")));
    }
    Ok(1.0 / tau)
}

/// `Φ(τ)` on the level `u = 1/τ`.
pub fn phi_of_tau(field: &SolutionField, tau: f64, beta: f64) -> Result<PhiValue> {
    let g = &field.grid;
    check_beta(g.n, g.k, beta)?;
    let level = check_tau(tau)?;
    let set = extract_level_set_with(&FieldInterpolant::new(field), level, DEFAULT_NODES)?;
    Ok(phi_on(&set, tau, beta))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiSample {
    pub tau: f64,
    pub level: f64,
    pub phi: f64,
    pub quad_err: f64,
    pub regular_min_grad: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiSeries {
    pub n: usize,
    pub k: usize,
    pub beta: f64,
    pub l: f64,
    pub gamma: f64,
    /// `Φ(−∞)` from the `γ`-asymptote.
    pub phi_minus_inf: f64,
    pub phi_minus_inf_err: f64,
    /// Ascending in `τ`.
    pub samples: Vec<PhiSample>,
    pub tol_mono: f64,
    /// Most negative `Φ(τ_{i+1}) − Φ(τ_i)`.
    pub worst_step: f64,
    pub monotone: bool,
    /// `Φ(−1) ≥ Φ(−∞) − tol_mono`.
    pub endpoint_ok: bool,
    pub notes: Vec<String>,
}

impl PhiSeries {
    /// Columns `tau, level, phi, quad_err, regular_min_grad`; the first row is the `τ = −∞` entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,level,phi,quad_err,regular_min_grad\n");
        let _ = writeln!(out, "-inf,0,{:.12e},{:.6e},nan", self.phi_minus_inf, self.phi_minus_inf_err);
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{:.12e},{:.12e},{:.12e},{:.6e},{:.6e}",
                s.tau, s.level, s.phi, s.quad_err, s.regular_min_grad
            );
        }
        out
    }
}

/// Default sampling: 20 levels log-spaced in `u ∈ [−1, u_hi]`, with
/// `u_hi = min(−0.05, 2·u|∂B_R)` so every level stays clear of the outer boundary.
pub fn default_levels(field: &SolutionField) -> Vec<f64> {
    let hi = (-0.05f64).min(2.0 * field.outer_value);
    let m = 20;
    (0..m)
        .map(|q| -((-hi).ln() * q as f64 / (m - 1) as f64).exp())
        .collect()
}

/// `Φ` over [`default_levels`], with `γ` from the field's asymptotic fit.
pub fn phi_series(field: &SolutionField, beta: f64) -> Result<PhiSeries> {
    let gamma = asymptotics_report(field)?.gamma;
    let taus: Vec<f64> = default_levels(field).iter().map(|u| 1.0 / u).collect();
    phi_series_with(field, beta, &taus, gamma.affine, gamma.affine_spread)
}

/// `Φ` at the given `τ` values; irregular or unreachable levels are skipped with a note.
pub fn phi_series_with(
    field: &SolutionField,
    beta: f64,
    taus: &[f64],
    gamma: f64,
    gamma_spread: f64,
) -> Result<PhiSeries> {
    let g = &field.grid;
    let (n, k) = (g.n, g.k);
    check_beta(n, k, beta)?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Precondition(format!("γ = {gamma} is unusable for Φ(−∞)")));
    }
    let mut taus = taus.to_vec();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let interp = FieldInterpolant::new(field);
    let mut samples = Vec::new();
    let mut notes = Vec::new();
    for &tau in &taus {
        let level = check_tau(tau)?;
        match extract_level_set_with(&interp, level, DEFAULT_NODES) {
            Ok(set) => {
                let v = phi_on(&set, tau, beta);
                samples.push(PhiSample {
                    tau,
                    level,
                    phi: v.phi,
                    quad_err: (v.phi - v.phi_frame).abs(),
                    regular_min_grad: v.min_grad,
                    flagged: v.flagged,
                });
            }
            Err(e @ (Error::Rejected(_) | Error::Domain(_))) => notes.push(format!("τ = {tau:.6}: skipped, {e}")),
            Err(e) => return Err(e),
        }
    }
    let phi_minus_inf = radial_phi(n, k, beta, gamma);
    let exponent = k as f64 - beta / alpha0(n, k);
    let phi_minus_inf_err = (exponent * phi_minus_inf * gamma_spread / gamma).abs();
    let mut mags: Vec<f64> = samples.iter().map(|s| s.phi.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let median = mags.get(mags.len() / 2).copied().unwrap_or(0.0);
    let tol_mono = 1e-3 * median;
    let worst_step = samples
        .windows(2)
        .map(|w| w[1].phi - w[0].phi)
        .fold(f64::INFINITY, f64::min);
    let endpoint_ok = samples
        .last()
        .filter(|s| s.tau == -1.0)
        .map_or(true, |s| s.phi >= phi_minus_inf - tol_mono);
    Ok(PhiSeries {
        n,
        k,
        beta,
        l: l_exponent(n, k),
        gamma,
        phi_minus_inf,
        phi_minus_inf_err,
        monotone: samples.len() >= 2 && worst_step >= -tol_mono,
        worst_step,
        tol_mono,
        endpoint_ok,
        samples,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RadialSurface;
    use crate::solver::AnnulusGrid;

    fn mu_field() -> SolutionField {
        let s = RadialSurface::ball(5, 1.0).unwrap();
        let grid = AnnulusGrid::new(&s, 2, 1000.0, 0.0, 256, 33, None).unwrap();
        SolutionField::from_fn(grid, -1000f64.powf(-0.5), |r, _| -r.powf(-0.5))
    }

    #[test]
    fn constant_on_exact_mu() {
        let f = mu_field();
        let series = phi_series_with(&f, 1.0, &[-20.0, -7.0, -3.0, -1.0], 1.0, 0.0).unwrap();
        let exact = 4.0 * std::f64::consts::PI.powi(2) / 3.0;
        assert_eq!(series.samples.len(), 4, "{:?}", series.notes);
        for s in &series.samples {
            assert!((s.phi - exact).abs() < 1e-4 * exact, "{s:?}");
            assert!(s.quad_err < 1e-4 * exact, "{s:?}");
        }
        assert!(series.monotone && series.endpoint_ok);
        assert!(series.to_csv().lines().count() == 6);
    }

    #[test]
    fn scaled_mu_picks_up_gamma_power() {
        // u = −γ r^{−1/2} equals −1 on the sphere of radius γ²
        let gamma: f64 = 1.3;
        let s = RadialSurface::ball(5, gamma * gamma).unwrap();
        let grid = AnnulusGrid::new(&s, 2, 1000.0, 0.0, 256, 33, None).unwrap();
        let f = SolutionField::from_fn(grid, -gamma * 1000f64.powf(-0.5), |r, _| -gamma * r.powf(-0.5));
        for beta in [1.0 / 3.0, 1.0, 2.0] {
            let v = phi_of_tau(&f, -4.0, beta).unwrap();
            let expect = radial_phi(5, 2, beta, gamma);
            assert!((v.phi - expect).abs() < 1e-4 * expect, "{beta}: {} vs {expect}", v.phi);
        }
    }

    #[test]
    fn rejects_small_beta() {
        let err = phi_of_tau(&mu_field(), -2.0, 0.1).unwrap_err();
        assert!(err.to_string().contains("(n−2k)/(n−k)"), "{err}");
    }
}
