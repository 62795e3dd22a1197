//! Hessians in spherical coordinates.

use crate::error::{Error, Result};
use crate::symfun::{Spectrum, SymMatrix};

/// Derivatives of a scalar field in an orthonormal sphere frame
/// `τ_1..τ_{n-1}` (geodesic normal coordinates on the unit sphere) and `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereDerivs {
    pub f_a: Vec<f64>,
    /// Covariant Hessian on the unit sphere, `(n-1) × (n-1)`.
    pub f_ab: SymMatrix,
    pub f_r: f64,
    pub f_ar: Vec<f64>,
    pub f_rr: f64,
}

/// Euclidean Hessian in the orthonormal frame `(τ_1, …, τ_{n-1}, ∂_r)`.
pub fn spherical_hessian(d: &SphereDerivs, r: f64) -> Result<SymMatrix> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let m = d.f_ab.dim();
    if d.f_a.len() != m || d.f_ar.len() != m {
        return Err(Error::Domain("sphere derivative blocks have mismatched sizes".into()));
    }
    let n = m + 1;
    Ok(SymMatrix::from_upper(n, |i, j| {
        if j < m {
            let delta = if i == j { 1.0 } else { 0.0 };
            d.f_ab.get(i, j) / (r * r) + d.f_r * delta / r
        } else if i < m {
            d.f_ar[i] / r - d.f_a[i] / (r * r)
        } else {
            d.f_rr
        }
    }))
}

/// Derivatives of an axisymmetric field `u(r, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxisymDerivs {
    pub u_r: f64,
    pub u_theta: f64,
    pub u_rr: f64,
    pub u_rtheta: f64,
    pub u_thetatheta: f64,
}

/// The Hessian of an axisymmetric field: a symmetric `(r, θ)` block plus an
/// `(n-2)`-fold azimuthal eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisymHessian {
    pub rr: f64,
    pub rt: f64,
    pub tt: f64,
    pub az: f64,
    pub n: usize,
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl AxisymHessian {
    pub fn new(d: &AxisymDerivs, r: f64, theta: f64, n: usize) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {r}")));
        }
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::Domain(format!("polar angle {theta} outside [0, π]")));
        }
        if n < 3 {
            return Err(Error::Domain(format!("dimension must be >= 3, got {n}")));
        }
        let tt = d.u_thetatheta / (r * r) + d.u_r / r;
        let s = theta.sin();
        let az = if s < 1e-12 {
            let scale = 1.0 + (d.u_r * r).abs() + d.u_thetatheta.abs();
            if d.u_theta.abs() > 1e-10 * scale {
                return Err(Error::Domain(format!(
                    "u_theta = {} on the symmetry axis; field is not axis-smooth",
                    d.u_theta
                )));
            }
            tt
        } else {
            d.u_r / r + theta.cos() / s * d.u_theta / (r * r)
        };
        Ok(AxisymHessian {
            rr: d.u_rr,
            rt: d.u_rtheta / r - d.u_theta / (r * r),
            tt,
            az,
            n,
        })
    }

    /// The two block eigenvalues followed by the azimuthal one `n - 2` times.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mean = 0.5 * (self.rr + self.tt);
        let half = 0.5 * (self.rr - self.tt);
        let rad = half.hypot(self.rt);
        let mut out = vec![mean - rad, mean + rad];
        out.extend(std::iter::repeat_n(self.az, self.n - 2));
        out
    }

    /// `S_k` evaluated without an eigensolve:
    /// `Σ_j e_j(block) · C(n-2, k-j) · az^{k-j}`.
    pub fn sigma_k(&self, k: usize) -> f64 {
        let (e1, e2) = (self.rr + self.tt, self.rr * self.tt - self.rt * self.rt);
        let m = self.n - 2;
        let t = |j: usize| -> f64 {
            if j > k {
                0.0
            } else {
                binom(m, k - j) * self.az.powi((k - j) as i32)
            }
        };
        t(0) + e1 * t(1) + e2 * t(2)
    }

    /// Partial derivatives of [`Self::sigma_k`] with respect to
    /// `(rr, rt, tt, az)`.
    pub fn sigma_k_partials(&self, k: usize) -> [f64; 4] {
        let (e1, e2) = (self.rr + self.tt, self.rr * self.tt - self.rt * self.rt);
        let m = self.n - 2;
        let t = |j: usize| -> f64 {
            if j > k {
                0.0
            } else {
                binom(m, k - j) * self.az.powi((k - j) as i32)
            }
        };
        let dt = |j: usize| -> f64 {
            if j >= k {
                0.0
            } else {
                let p = k - j;
                binom(m, p) * p as f64 * self.az.powi(p as i32 - 1)
            }
        };
        [
            t(1) + self.tt * t(2),
            -2.0 * self.rt * t(2),
            t(1) + self.rr * t(2),
            dt(0) + e1 * dt(1) + e2 * dt(2),
        ]
    }
}

/// Eigenvalues of the Hessian of an axisymmetric field, block pair first.
pub fn axisym_hessian_eigs(d: &AxisymDerivs, r: f64, theta: f64, n: usize) -> Result<Spectrum> {
    Spectrum::new(AxisymHessian::new(d, r, theta, n)?.eigenvalues())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfun::{elem_sym, sigma_k_of_matrix};
    use std::f64::consts::PI;

    #[test]
    fn radial_examples() {
        let r: f64 = 1.7;
        // f = r²
        let d = SphereDerivs {
            f_a: vec![0.0; 4],
            f_ab: SymMatrix::zeros(4),
            f_r: 2.0 * r,
            f_ar: vec![0.0; 4],
            f_rr: 2.0,
        };
        let h = spherical_hessian(&d, r).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 2.0 } else { 0.0 };
                assert!((h.get(i, j) - want).abs() < 1e-15);
            }
        }
        assert!(spherical_hessian(&d, 0.0).is_err());
    }

    #[test]
    fn mu_eigenvalues() {
        let r: f64 = 2.3;
        let d = AxisymDerivs {
            u_r: 0.5 * r.powf(-1.5),
            u_rr: -0.75 * r.powf(-2.5),
            ..Default::default()
        };
        let ev = axisym_hessian_eigs(&d, r, 1.0, 5).unwrap();
        let s = r.powf(-2.5);
        let mut got = ev.values().to_vec();
        got.sort_by(f64::total_cmp);
        let want = [-0.75 * s, 0.5 * s, 0.5 * s, 0.5 * s, 0.5 * s];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
        assert!(elem_sym(&ev, 2).unwrap().abs() < 1e-15);
    }

    #[test]
    fn linear_field_has_zero_hessian() {
        let (r, t): (f64, f64) = (1.3, 0.8);
        let d = AxisymDerivs {
            u_r: t.cos(),
            u_theta: -r * t.sin(),
            u_rr: 0.0,
            u_rtheta: -t.sin(),
            u_thetatheta: -r * t.cos(),
        };
        for v in axisym_hessian_eigs(&d, r, t, 6).unwrap().values() {
            assert!(v.abs() < 1e-14);
        }
    }

    #[test]
    fn axis_rule() {
        let d = AxisymDerivs {
            u_theta: 0.3,
            ..Default::default()
        };
        assert!(axisym_hessian_eigs(&d, 1.0, 0.0, 5).is_err());
        assert!(axisym_hessian_eigs(&d, 1.0, PI, 5).is_err());
        let ok = AxisymDerivs {
            u_r: 1.0,
            u_thetatheta: 2.0,
            ..Default::default()
        };
        let ev = axisym_hessian_eigs(&ok, 1.0, 0.0, 5).unwrap();
        assert_eq!(ev.values()[4], 3.0);
    }

    #[test]
    fn polynomial_sigma_matches_eigen_route() {
        let d = AxisymDerivs {
            u_r: 0.4,
            u_theta: -0.2,
            u_rr: -0.3,
            u_rtheta: 0.7,
            u_thetatheta: 0.9,
        };
        let h = AxisymHessian::new(&d, 1.4, 1.1, 7).unwrap();
        let ev = h.eigenvalues();
        let full = SymMatrix::from_diagonal(&ev);
        for k in 1..=4 {
            let a = h.sigma_k(k);
            let b = sigma_k_of_matrix(&full, k).unwrap();
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0), "k={k}: {a} vs {b}");
            let p = h.sigma_k_partials(k);
            let step = 1e-6;
            let fields: [fn(&mut AxisymHessian) -> &mut f64; 4] =
                [|h| &mut h.rr, |h| &mut h.rt, |h| &mut h.tt, |h| &mut h.az];
            for (idx, field) in fields.iter().enumerate() {
                let (mut hp, mut hm) = (h, h);
                *field(&mut hp) += step;
                *field(&mut hm) -= step;
                let fd = (hp.sigma_k(k) - hm.sigma_k(k)) / (2.0 * step);
                assert!((fd - p[idx]).abs() < 1e-7, "k={k} idx={idx}: {fd} vs {}", p[idx]);
            }
        }
    }
}
