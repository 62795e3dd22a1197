//! The subsolution `φ = g^N` with `g = r/ρ(θ)` outside a star-shaped domain.

use std::f64::consts::PI;

use super::curvature::boundary_curvature;
use super::spherical::AxisymHessian;
use super::RadialSurface;
use crate::error::{Error, Result};
use crate::symfun::{elem_sym_all, sigma_k_of_matrix, SymMatrix};

/// Hessian of `g = r/ρ(θ)` in the frame `(e_θ, azimuthal…, ∂_r)`.
/// The last row and column vanish identically.
pub fn hessian_of_g(surface: &RadialSurface, theta: f64, r: f64) -> Result<SymMatrix> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let bp = boundary_curvature(surface, theta, 1)?;
    let n = surface.n();
    let w = bp.w;
    Ok(SymMatrix::from_upper(n, |i, j| {
        if j == n - 1 {
            0.0
        } else if i == 0 && j == 0 {
            w.powi(3) * bp.a.get(0, 0) / r
        } else if i == 0 {
            w * w * bp.a.get(0, j) / r
        } else {
            w * bp.a.get(i, j) / r
        }
    }))
}

/// Block data of `D²g` and `Dg` at `(θ, r)`:
/// `(H_θθ, H_az, ∂_θ g / r, ∂_r g, g)`.
fn g_data(surface: &RadialSurface, theta: f64, r: f64) -> Result<(f64, f64, f64, f64, f64)> {
    let bp = boundary_curvature(surface, theta, 1)?;
    let w = bp.w;
    let rho = bp.rho;
    let rho1 = surface.rho_prime(theta);
    Ok((
        w.powi(3) * bp.a.get(0, 0) / r,
        if surface.n() > 2 { w * bp.a.get(1, 1) / r } else { 0.0 },
        -rho1 / (rho * rho),
        1.0 / rho,
        r / rho,
    ))
}

/// `σ_k(D²(g^N))` at `(θ, r)`, from the full `n × n` matrix
/// `A·D²g + B·Dg⊗Dg` with `A = N g^{N-1}`, `B = N(N-1) g^{N-2}`.
pub fn subsolution_sigma_k(
    surface: &RadialSurface,
    big_n: u32,
    theta: f64,
    r: f64,
    k: usize,
) -> Result<f64> {
    let g = r / surface.rho(theta);
    if g < 1.0 - 1e-12 {
        return Err(Error::Precondition(format!(
            "point (theta = {theta}, r = {r}) lies inside the domain (g = {g})"
        )));
    }
    let nf = big_n as f64;
    let a = nf * g.powf(nf - 1.0);
    let b = nf * (nf - 1.0) * g.powf(nf - 2.0);
    let hg = hessian_of_g(surface, theta, r)?;
    let n = surface.n();
    let (_, _, d1, dr, _) = g_data(surface, theta, r)?;
    let mut dg = vec![0.0; n];
    dg[0] = d1;
    dg[n - 1] = dr;
    let m = SymMatrix::from_upper(n, |i, j| a * hg.get(i, j) + b * dg[i] * dg[j]);
    sigma_k_of_matrix(&m, k)
}

/// `ln(σ_k(D²(g^N)) · r^k)`, or `None` when `σ_k ≤ 0`. Computed with `A`
/// factored out so that large `N` does not overflow.
fn log_scaled_sigma(surface: &RadialSurface, big_n: u32, theta: f64, r: f64, k: usize) -> Option<f64> {
    let (h11, haz, d1, dr, g) = g_data(surface, theta, r).ok()?;
    let nf = big_n as f64;
    let ratio = (nf - 1.0) / g;
    let block = AxisymHessian {
        rr: h11 + ratio * d1 * d1,
        rt: ratio * d1 * dr,
        tt: ratio * dr * dr,
        az: haz,
        n: surface.n(),
    };
    let s = block.sigma_k(k);
    if s > 0.0 {
        let kf = k as f64;
        Some(kf * (nf.ln() + (nf - 1.0) * g.ln()) + s.ln() + kf * r.ln())
    } else {
        None
    }
}

/// Result of the exponent search.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsolutionParams {
    pub big_n: u32,
    /// `min σ_{k-1}(κ)` over the boundary.
    pub c1: f64,
    /// Largest negative part of the `A^k/r^k` coefficient of `σ_k(D²φ)`.
    pub c0: f64,
    /// Smallest `ln(σ_k · r^k)` on the verification grid.
    pub min_log_margin: f64,
    pub verified_points: usize,
}

/// Sampling parameters for [`select_subsolution_n`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsolutionSearch {
    pub theta_samples: usize,
    pub g_samples: usize,
    pub g_max: f64,
    pub cap: u32,
    pub verify_factor: usize,
}

impl Default for SubsolutionSearch {
    fn default() -> Self {
        SubsolutionSearch {
            theta_samples: 512,
            g_samples: 64,
            g_max: 10.0,
            cap: 1 << 16,
            verify_factor: 10,
        }
    }
}

impl SubsolutionSearch {
    fn scan(&self, surface: &RadialSurface, big_n: u32, k: usize, factor: usize) -> Option<f64> {
        let nt = self.theta_samples * factor;
        let ng = self.g_samples * factor;
        let mut worst = f64::INFINITY;
        for j in 0..=nt {
            let theta = PI * j as f64 / nt as f64;
            let rho = surface.rho(theta);
            for i in 0..=ng {
                let g = 1.0 + (self.g_max - 1.0) * i as f64 / ng as f64;
                let v = log_scaled_sigma(surface, big_n, theta, g * rho, k)?;
                if v < 0.0 {
                    return None;
                }
                worst = worst.min(v);
            }
        }
        Some(worst)
    }

    /// Doubling search from `N = 2`; the accepted `N` is re-checked on a grid
    /// `verify_factor` times denser in each direction.
    pub fn run(&self, surface: &RadialSurface, k: usize) -> Result<SubsolutionParams> {
        let mut big_n = 2u32;
        loop {
            if self.scan(surface, big_n, k, 1).is_some() {
                if let Some(margin) = self.scan(surface, big_n, k, self.verify_factor) {
                    let (c0, c1) = curvature_constants(surface, k, self.theta_samples)?;
                    return Ok(SubsolutionParams {
                        big_n,
                        c1,
                        c0,
                        min_log_margin: margin,
                        verified_points: (self.theta_samples * self.verify_factor + 1)
                            * (self.g_samples * self.verify_factor + 1),
                    });
                }
            }
            if big_n >= self.cap {
                return Err(Error::Inadmissible {
                    reason: format!(
                        "no exponent N <= {} makes g^N a subsolution; surface is likely not (k-1)-convex",
                        self.cap
                    ),
                    worst_theta: worst_curvature_angle(surface, k, self.theta_samples),
                    margin: curvature_constants(surface, k, self.theta_samples)
                        .map(|c| c.1)
                        .unwrap_or(f64::NAN),
                });
            }
            big_n *= 2;
        }
    }
}

/// Smallest doubling exponent with `σ_k(D²g^N) r^k ≥ 1` on `1 ≤ g ≤ 10`.
pub fn select_subsolution_n(surface: &RadialSurface, k: usize) -> Result<SubsolutionParams> {
    SubsolutionSearch::default().run(surface, k)
}

fn worst_curvature_angle(surface: &RadialSurface, k: usize, samples: usize) -> f64 {
    (0..=samples)
        .map(|j| PI * j as f64 / samples as f64)
        .filter_map(|t| boundary_curvature(surface, t, k).ok().map(|bp| (bp.sigma_km1, t)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|p| p.1)
        .unwrap_or(0.0)
}

/// `(c0, c1)`: `c1 = min σ_{k-1}(κ)`, and `c0` the largest negative part of
/// `w^k [w²(σ_k(a) − σ_k(a_αβ)) + σ_k(a_αβ)]` over the samples.
fn curvature_constants(surface: &RadialSurface, k: usize, samples: usize) -> Result<(f64, f64)> {
    let mut c0 = 0.0_f64;
    let mut c1 = f64::INFINITY;
    for j in 0..=samples {
        let theta = PI * j as f64 / samples as f64;
        let bp = boundary_curvature(surface, theta, k)?;
        c1 = c1.min(bp.sigma_km1);
        let kv = bp.kappa.values();
        let full = elem_sym_all(kv, k)[k];
        let tangential = elem_sym_all(&kv[1..], k)[k];
        let coeff = bp.w.powi(k as i32) * (bp.w * bp.w * (full - tangential) + tangential);
        c0 = c0.max(-coeff);
    }
    Ok((c0, c1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Cartesian Hessian of `|x| / ρ(θ)` by central differences, expressed
    /// in the frame `(e_θ, e_2, …, e_{n-2}, x̂)` at `x = r(cos θ, sin θ, 0, …)`.
    fn fd_hessian_of_g(s: &RadialSurface, theta: f64, r: f64) -> Vec<Vec<f64>> {
        let n = s.n();
        let g = |x: &[f64]| {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            norm / s.rho((x[0] / norm).clamp(-1.0, 1.0).acos())
        };
        let mut x0 = vec![0.0; n];
        x0[0] = r * theta.cos();
        x0[1] = r * theta.sin();
        let h = 1e-4;
        let mut cart = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for (si, sj, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                    let mut x = x0.clone();
                    x[i] += si * h;
                    x[j] += sj * h;
                    acc += w * g(&x);
                }
                cart[i][j] = acc / (4.0 * h * h);
            }
        }
        let mut frame = vec![vec![0.0; n]; n];
        frame[0][0] = -theta.sin();
        frame[0][1] = theta.cos();
        for a in 1..n - 1 {
            frame[a][a + 1] = 1.0;
        }
        frame[n - 1][0] = theta.cos();
        frame[n - 1][1] = theta.sin();
        (0..n)
            .map(|p| {
                (0..n)
                    .map(|q| {
                        (0..n)
                            .flat_map(|i| (0..n).map(move |j| (i, j)))
                            .map(|(i, j)| frame[p][i] * cart[i][j] * frame[q][j])
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn hessian_of_g_matches_fd_oracle() {
        let s = RadialSurface::new(5, vec![1.0, 0.0, 0.2]).unwrap();
        let (theta, r) = (PI / 3.0, 2.0);
        let h = hessian_of_g(&s, theta, r).unwrap();
        let fd = fd_hessian_of_g(&s, theta, r);
        for i in 0..5 {
            assert_eq!(h.get(i, 4), 0.0);
            for j in 0..5 {
                assert!((h.get(i, j) - fd[i][j]).abs() < 1e-6, "({i},{j}) {} vs {}", h.get(i, j), fd[i][j]);
            }
        }
    }

    #[test]
    fn hessian_of_g_for_balls() {
        let s = RadialSurface::ball(5, 2.0).unwrap();
        let h = hessian_of_g(&s, 0.7, 3.0).unwrap();
        for i in 0..5 {
            let want = if i < 4 { 1.0 / 6.0 } else { 0.0 };
            assert!((h.get(i, i) - want).abs() < 1e-15);
        }
    }

    #[test]
    fn ball_subsolution() {
        let s = RadialSurface::ball(5, 1.0).unwrap();
        let v = subsolution_sigma_k(&s, 2, 0.4, 1.0, 2).unwrap();
        assert!((v - 40.0).abs() < 1e-12, "{v}");
        assert!(subsolution_sigma_k(&s, 2, 0.4, 0.5, 2).is_err());
        let p = select_subsolution_n(&s, 2).unwrap();
        assert_eq!(p.big_n, 2);
        assert!((p.c1 - 4.0).abs() < 1e-13);
    }

    #[test]
    fn fast_path_agrees_with_full_matrix() {
        let s = RadialSurface::new(6, vec![1.0, 0.05, 0.1]).unwrap();
        for (theta, g) in [(0.0, 1.0), (0.3, 1.5), (1.2, 4.0), (PI, 2.0)] {
            let r = g * s.rho(theta);
            let full = subsolution_sigma_k(&s, 8, theta, r, 2).unwrap();
            let fast = log_scaled_sigma(&s, 8, theta, r, 2).unwrap();
            let want = (full * r * r).ln();
            assert!((fast - want).abs() < 1e-10, "{fast} vs {want}");
        }
    }

    #[test]
    fn perturbed_subsolution_scan() {
        let s = RadialSurface::new(5, vec![1.0, 0.0, 0.1]).unwrap();
        let p = select_subsolution_n(&s, 2).unwrap();
        assert!(p.big_n >= 2 && p.c1 > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let theta = rng.random_range(0.0..PI);
            let r = rng.random_range(1.0..10.0) * s.rho(theta);
            let v = subsolution_sigma_k(&s, p.big_n, theta, r, 2).unwrap();
            assert!(v * r * r >= 1.0, "theta={theta} r={r}: {v}");
        }
    }

    #[test]
    fn inadmissible_surface_fails_search() {
        let s = RadialSurface::new(5, vec![1.0, 0.0, 0.9]).unwrap();
        let search = SubsolutionSearch {
            theta_samples: 128,
            g_samples: 16,
            ..Default::default()
        };
        assert!(matches!(search.run(&s, 2), Err(Error::Inadmissible { .. })));
    }
}
