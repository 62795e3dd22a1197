//! Second fundamental form and principal curvatures of `r = ρ(θ)`.

use std::f64::consts::PI;

use super::RadialSurface;
use crate::error::{Error, Result};
use crate::symfun::{elem_sym_all, gamma_margins, Spectrum, SymMatrix};

/// Curvature data at one boundary point, in the frame where `e₁` is the
/// `θ`-direction (so `∇ρ ∥ e₁`) and `e₂..e_{n-1}` are azimuthal.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPointData {
    pub theta: f64,
    pub rho: f64,
    pub w: f64,
    /// Induced metric `g_ij` on the unit-sphere frame.
    pub g: SymMatrix,
    /// `γ^{ij}`, the square root of `g^{ij}`.
    pub gamma: SymMatrix,
    pub h: SymMatrix,
    pub a: SymMatrix,
    pub kappa: Spectrum,
    pub sigma_km1: f64,
}

/// Covariant sphere Hessian entries of `ρ` in the adapted frame:
/// `(ρ_11, ρ_αα)`. On the axis `cot θ · ρ'` is replaced by its limit `ρ''`.
pub(crate) fn rho_hessian(surface: &RadialSurface, theta: f64) -> (f64, f64) {
    let r2 = surface.rho_second(theta);
    let s = theta.sin();
    let az = if s.abs() < 1e-8 {
        r2
    } else {
        theta.cos() / s * surface.rho_prime(theta)
    };
    (r2, az)
}

/// Assembles `g`, `γ`, `h` and `a = γhγ` at `θ`.
pub fn boundary_curvature(surface: &RadialSurface, theta: f64, k: usize) -> Result<BoundaryPointData> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("polar angle {theta} outside [0, π]")));
    }
    let n = surface.n();
    let m = n - 1;
    if k == 0 || k > n {
        return Err(Error::Domain(format!("k = {k} invalid for n = {n}")));
    }
    let rho = surface.rho(theta);
    let rho1 = surface.rho_prime(theta);
    let (rho11, rho_aa) = rho_hessian(surface, theta);
    let phi1 = rho1 / rho;
    let phi11 = rho11 / rho - phi1 * phi1;
    let phi_aa = rho_aa / rho;
    let w = (1.0 + phi1 * phi1).sqrt();

    let diag = |first: f64, rest: f64| {
        let mut d = vec![rest; m];
        d[0] = first;
        SymMatrix::from_diagonal(&d)
    };
    let g = diag(rho * rho + rho1 * rho1, rho * rho);
    let gamma = diag(1.0 / (rho * w), 1.0 / rho);
    let h11 = rho / w * (1.0 + phi1 * phi1 - phi11);
    let h_aa = rho / w * (1.0 - phi_aa);
    let h = diag(h11, h_aa);
    let a = SymMatrix::from_upper(m, |i, j| {
        (0..m)
            .flat_map(|p| (0..m).map(move |q| (p, q)))
            .map(|(p, q)| gamma.get(i, p) * h.get(p, q) * gamma.get(q, j))
            .sum()
    });
    // `a` is diagonal in this frame, so its eigenvalues are read off exactly.
    let kappa: Vec<f64> = (0..m).map(|i| a.get(i, i)).collect();
    let sigma_km1 = elem_sym_all(&kappa, k - 1)[k - 1];
    Ok(BoundaryPointData {
        theta,
        rho,
        w,
        g,
        gamma,
        h,
        a,
        kappa: Spectrum::new(kappa)?,
        sigma_km1,
    })
}

/// Outcome of the `Γ_{k-1}` curvature scan.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AdmissibilityCertificate {
    pub k: usize,
    pub samples: usize,
    /// Minimum scaled `S_m(κ)` over the samples, for `m = 1..k-1`.
    pub min_margins: Vec<f64>,
    /// Angle where the smallest scaled margin occurs.
    pub worst_theta: f64,
    /// `min σ_{k-1}(κ)`; equals 1 when `k = 1`.
    pub c1: f64,
}

/// Checks `κ(θ_j) ∈ Γ_{k-1}` at `samples + 1` equispaced angles in `[0, π]`.
pub fn check_admissible_domain(
    surface: &RadialSurface,
    k: usize,
    samples: usize,
) -> Result<AdmissibilityCertificate> {
    if samples < 64 {
        return Err(Error::Precondition(format!("need at least 64 samples, got {samples}")));
    }
    let mut min_margins = vec![f64::INFINITY; k.saturating_sub(1)];
    let mut worst = (f64::INFINITY, 0.0);
    let mut c1 = f64::INFINITY;
    for j in 0..=samples {
        let theta = PI * j as f64 / samples as f64;
        let bp = boundary_curvature(surface, theta, k)?;
        c1 = c1.min(bp.sigma_km1);
        let margins = gamma_margins(bp.kappa.values(), k - 1);
        for (lo, m) in min_margins.iter_mut().zip(&margins) {
            *lo = lo.min(*m);
        }
        if let Some(&smallest) = margins.iter().min_by(|a, b| a.total_cmp(b)) {
            if smallest < worst.0 {
                worst = (smallest, theta);
            }
        }
    }
    if worst.0 <= 0.0 {
        return Err(Error::Inadmissible {
            reason: format!("principal curvatures leave Γ_{}", k - 1),
            worst_theta: worst.1,
            margin: worst.0,
        });
    }
    Ok(AdmissibilityCertificate {
        k,
        samples,
        min_margins,
        worst_theta: worst.1,
        c1,
    })
}

/// Runs [`check_admissible_domain`] from 512 samples, doubling until two
/// consecutive certificates agree on the minimum margins to 1e-6 relative.
pub fn certify_admissible(surface: &RadialSurface, k: usize) -> Result<AdmissibilityCertificate> {
    let mut samples = 512;
    let mut prev = check_admissible_domain(surface, k, samples)?;
    loop {
        samples *= 2;
        let next = check_admissible_domain(surface, k, samples)?;
        let agree = prev
            .min_margins
            .iter()
            .zip(&next.min_margins)
            .all(|(a, b)| (a - b).abs() <= 1e-6 * a.abs().max(b.abs()))
            && (prev.c1 - next.c1).abs() <= 1e-6 * prev.c1.abs();
        if agree || samples >= 1 << 16 {
            return Ok(next);
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Curvatures of the meridian curve `ρ(θ)(cos θ, sin θ)` from finite
    /// differences of the embedding, independent of the frame formulas.
    fn embedding_curvatures(s: &RadialSurface, theta: f64) -> (f64, f64) {
        let c = |t: f64| (s.rho(t) * t.cos(), s.rho(t) * t.sin());
        let h = 1e-4;
        let (xm2, ym2) = c(theta - 2.0 * h);
        let (xm, ym) = c(theta - h);
        let (x0, y0) = c(theta);
        let (xp, yp) = c(theta + h);
        let (xp2, yp2) = c(theta + 2.0 * h);
        let d1 = |fm2: f64, fm: f64, fp: f64, fp2: f64| (fm2 - 8.0 * fm + 8.0 * fp - fp2) / (12.0 * h);
        let d2 = |fm2: f64, fm: f64, f0: f64, fp: f64, fp2: f64| {
            (-fm2 + 16.0 * fm - 30.0 * f0 + 16.0 * fp - fp2) / (12.0 * h * h)
        };
        let (x1, y1) = (d1(xm2, xm, xp, xp2), d1(ym2, ym, yp, yp2));
        let (x2, y2) = (d2(xm2, xm, x0, xp, xp2), d2(ym2, ym, y0, yp, yp2));
        let speed = x1.hypot(y1);
        // Counter-clockwise traversal: the outward normal is (y1, -x1)/speed.
        let k_meridian = (x1 * y2 - y1 * x2) / speed.powi(3);
        let k_azimuthal = (-x1 / speed) / y0;
        (k_meridian, k_azimuthal)
    }

    #[test]
    fn round_sphere_is_exact() {
        let s = RadialSurface::ball(6, 2.5).unwrap();
        for theta in [0.0, 0.3, PI / 2.0, PI] {
            let bp = boundary_curvature(&s, theta, 3).unwrap();
            for &v in bp.kappa.values() {
                assert!((v - 0.4).abs() < 1e-14);
            }
            // C(5, 2) / 2.5²
            assert!((bp.sigma_km1 - 10.0 / 6.25).abs() < 1e-13);
        }
        let unit = RadialSurface::ball(5, 1.0).unwrap();
        let bp = boundary_curvature(&unit, 1.0, 2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(bp.a.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn perturbed_matches_embedding_oracle() {
        let s = RadialSurface::new(5, vec![1.0, 0.0, 0.2]).unwrap();
        let bp = boundary_curvature(&s, PI / 4.0, 2).unwrap();
        // Frozen values from an arbitrary-precision embedding computation.
        let (km, kaz) = (1.056542441352192, 1.299867367239363);
        let kv = bp.kappa.values();
        assert!((kv[0] - km).abs() < 1e-12 * km);
        for &v in &kv[1..] {
            assert!((v - kaz).abs() < 1e-12 * kaz);
        }
        for theta in [0.2, 0.9, 1.6, 2.5] {
            let (em, ea) = embedding_curvatures(&s, theta);
            let bp = boundary_curvature(&s, theta, 2).unwrap();
            assert!((bp.kappa.values()[0] - em).abs() < 1e-6 * em.abs().max(1.0), "{theta}");
            assert!((bp.kappa.values()[1] - ea).abs() < 1e-6 * ea.abs().max(1.0), "{theta}");
        }
    }

    #[test]
    fn admissibility_verdicts() {
        let ball = RadialSurface::ball(5, 1.0).unwrap();
        let cert = check_admissible_domain(&ball, 2, 64).unwrap();
        assert!((cert.c1 - 4.0).abs() < 1e-13);

        let mild = RadialSurface::new(5, vec![1.0, 0.0, 0.2]).unwrap();
        let cert = certify_admissible(&mild, 2).unwrap();
        assert!((cert.c1 - 3.75).abs() < 1e-9, "{}", cert.c1);

        let bad = RadialSurface::new(5, vec![1.0, 0.0, 0.9]).unwrap();
        match check_admissible_domain(&bad, 2, 512) {
            Err(Error::Inadmissible { margin, .. }) => assert!(margin < 0.0),
            other => panic!("expected rejection, got {other:?}"),
        }
        assert!(check_admissible_domain(&ball, 2, 10).is_err());
    }
}
