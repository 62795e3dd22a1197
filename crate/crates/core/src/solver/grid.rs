//! Boundary-fitted log-radial grid on `B_R ∖ Ω̄`.
//!
//! Node `(i, j)` sits at `θ_j = jπ/(n_θ−1)` and
//! `log r = a(θ) + L(θ) ξ(s_i)` with `a = log ρ`, `L = log R − a`,
//! `s_i = i/(n_s−1)` and `ξ(s) = (e^{cs} − 1)/(e^c − 1)` (`ξ = s` for `c = 0`).

use std::f64::consts::PI;

use super::stencil::{open_stencils, polar_stencils, Stencil};
use crate::error::{Error, Result};
use crate::geometry::RadialSurface;

/// First-layer target: `r_1 − ρ ≤ 0.01 ρ`.
const FIRST_LAYER: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusGrid {
    pub n: usize,
    pub k: usize,
    pub r_outer: f64,
    pub eps: f64,
    pub surface: RadialSurface,
    pub ns: usize,
    pub ntheta: usize,
    pub grading: f64,
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
    pub(crate) xi: Vec<f64>,
    pub(crate) dxi: Vec<f64>,
    pub(crate) d2xi: Vec<f64>,
    pub(crate) a: Vec<f64>,
    pub(crate) da: Vec<f64>,
    pub(crate) d2a: Vec<f64>,
    pub(crate) ds1: Vec<Stencil>,
    pub(crate) ds2: Vec<Stencil>,
    pub(crate) dt1: Vec<Stencil>,
    pub(crate) dt2: Vec<Stencil>,
}

fn xi_parts(c: f64, s: f64) -> (f64, f64, f64) {
    if c.abs() < 1e-12 {
        (s, 1.0, 0.0)
    } else {
        let den = c.exp_m1();
        let e = (c * s).exp();
        ((c * s).exp_m1() / den, c * e / den, c * c * e / den)
    }
}

impl AnnulusGrid {
    /// `grading = None` picks the smallest `c ≥ 0` meeting the first-layer target.
    pub fn new(
        surface: &RadialSurface,
        k: usize,
        r_outer: f64,
        eps: f64,
        ns: usize,
        ntheta: usize,
        grading: Option<f64>,
    ) -> Result<Self> {
        if ns < 8 || ntheta < 5 {
            return Err(Error::Domain(format!(
                "grid {ns}×{ntheta} too small (need n_s >= 8, n_θ >= 5)"
            )));
        }
        let (_, rho_max) = surface.rho_range();
        if !(r_outer > rho_max) {
            return Err(Error::Domain(format!("outer radius {r_outer} must exceed max ρ = {rho_max}")));
        }
        let theta: Vec<f64> = (0..ntheta).map(|j| PI * j as f64 / (ntheta - 1) as f64).collect();
        let a: Vec<f64> = theta.iter().map(|&t| surface.rho(t).ln()).collect();
        let da: Vec<f64> = theta.iter().map(|&t| surface.rho_prime(t) / surface.rho(t)).collect();
        let d2a: Vec<f64> = theta
            .iter()
            .map(|&t| {
                let (r0, r1, r2) = (surface.rho(t), surface.rho_prime(t), surface.rho_second(t));
                r2 / r0 - (r1 / r0).powi(2)
            })
            .collect();
        let l_max = a.iter().map(|ai| r_outer.ln() - ai).fold(0.0, f64::max);
        let s1 = 1.0 / (ns - 1) as f64;
        let target = (1.0 + FIRST_LAYER).ln();
        let c = match grading {
            Some(c) => c,
            None => {
                let layer = |c: f64| l_max * xi_parts(c, s1).0;
                if layer(0.0) <= target {
                    0.0
                } else {
                    let (mut lo, mut hi) = (0.0, 60.0);
                    if layer(hi) > target {
                        return Err(Error::Domain(format!(
                            "n_s = {ns} cannot resolve the inner boundary to 1% even with maximal grading"
                        )));
                    }
                    for _ in 0..100 {
                        let mid = 0.5 * (lo + hi);
                        if layer(mid) > target {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    hi
                }
            }
        };
        let s: Vec<f64> = (0..ns).map(|i| i as f64 * s1).collect();
        let parts: Vec<(f64, f64, f64)> = s.iter().map(|&si| xi_parts(c, si)).collect();
        let (ds1, ds2) = open_stencils(&s);
        let (dt1, dt2) = polar_stencils(ntheta);
        Ok(AnnulusGrid {
            n: surface.n(),
            k,
            r_outer,
            eps,
            surface: surface.clone(),
            ns,
            ntheta,
            grading: c,
            s,
            theta,
            xi: parts.iter().map(|p| p.0).collect(),
            dxi: parts.iter().map(|p| p.1).collect(),
            d2xi: parts.iter().map(|p| p.2).collect(),
            a,
            da,
            d2a,
            ds1,
            ds2,
            dt1,
            dt2,
        })
    }

    pub fn len(&self) -> usize {
        self.ns * self.ntheta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ntheta + j
    }

    pub fn span(&self, j: usize) -> f64 {
        self.r_outer.ln() - self.a[j]
    }

    pub fn log_r(&self, i: usize, j: usize) -> f64 {
        self.a[j] + self.span(j) * self.xi[i]
    }

    pub fn r(&self, i: usize, j: usize) -> f64 {
        if i == self.ns - 1 {
            self.r_outer
        } else {
            self.log_r(i, j).exp()
        }
    }

    /// `(t_s, t_θ, t_ss, t_sθ, t_θθ)` for `t = log r`.
    pub(crate) fn metric(&self, i: usize, j: usize) -> [f64; 5] {
        let l = self.span(j);
        [
            l * self.dxi[i],
            self.da[j] * (1.0 - self.xi[i]),
            l * self.d2xi[i],
            -self.da[j] * self.dxi[i],
            self.d2a[j] * (1.0 - self.xi[i]),
        ]
    }

    /// Linear map from computational derivatives
    /// `(U_s, U_θ, U_ss, U_sθ, U_θθ)` to `(u_r, u_θ, u_rr, u_rθ, u_θθ)` at a node.
    pub(crate) fn chain_matrix(&self, i: usize, j: usize) -> [[f64; 5]; 5] {
        let mut m = [[0.0; 5]; 5];
        for c in 0..5 {
            let mut e = [0.0; 5];
            e[c] = 1.0;
            let p = self.to_physical(i, j, e);
            for (q, v) in p.iter().enumerate() {
                m[q][c] = *v;
            }
        }
        m
    }

    pub(crate) fn to_physical(&self, i: usize, j: usize, comp: [f64; 5]) -> [f64; 5] {
        let [us, uth, uss, usth, uthth] = comp;
        let [ts, tth, tss, tsth, tthth] = self.metric(i, j);
        let u_t = us / ts;
        let u_theta = uth - u_t * tth;
        let u_tt = (uss - u_t * tss) / (ts * ts);
        let u_ttheta = (usth - u_tt * ts * tth - u_t * tsth) / ts;
        let u_thth = uthth - u_tt * tth * tth - 2.0 * u_ttheta * tth - u_t * tthth;
        let r = self.r(i, j);
        [u_t / r, u_theta, (u_tt - u_t) / (r * r), u_ttheta / r, u_thth]
    }

    /// Computational derivatives of nodal data `u` at `(i, j)`.
    pub(crate) fn comp_derivs(&self, u: &[f64], i: usize, j: usize) -> [f64; 5] {
        let row = |ii: usize| ii * self.ntheta;
        let us = self.ds1[i].apply(|ii| u[row(ii) + j]);
        let uss = self.ds2[i].apply(|ii| u[row(ii) + j]);
        let uth = self.dt1[j].apply(|jj| u[row(i) + jj]);
        let uthth = self.dt2[j].apply(|jj| u[row(i) + jj]);
        let usth = self.ds1[i].apply(|ii| self.dt1[j].apply(|jj| u[row(ii) + jj]));
        [us, uth, uss, usth, uthth]
    }
}
