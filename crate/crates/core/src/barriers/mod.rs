//! Radial model solutions, the barrier family `φ(x, C) = −C(|x|+ε)^{−α₀}`
//! and the data of the approximate Dirichlet problem on `B_R ∖ Ω̄`.

use crate::error::{Error, Result};
use crate::geometry::{certify_admissible, AdmissibilityCertificate, RadialSurface};
use crate::symfun::{elem_sym_all, Spectrum};

/// `n/k − 2`.
pub fn alpha0(n: usize, k: usize) -> f64 {
    n as f64 / k as f64 - 2.0
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Rejects `n <= 2k`. At `n = 2k` the radial solutions are `C log|x| − 1`,
/// which cannot tend to zero at infinity.
pub fn check_dimensions(n: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if n == 2 * k {
        return Err(Error::Rejected(format!(
            "k = n/2 = {k}: the radial solutions u = C log|x| - 1 (any C > 0) satisfy \
             S_k(D²u) = 0 with u = -1 on the unit sphere but do not decay, so the \
             exterior problem has no decaying solution"
        )));
    }
    if n < 2 * k {
        return Err(Error::Rejected(format!(
            "k = {k} > n/2 = {}: α₀ = n/k - 2 < 0, so the barrier r^(-α₀) grows at infinity \
             and no decaying solution exists",
            n as f64 / 2.0
        )));
    }
    Ok(())
}

/// `φ(x, C) = −C(|x| + ε)^{−α₀}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierFamily {
    pub n: usize,
    pub k: usize,
    pub alpha0: f64,
    pub eps: f64,
    pub c: f64,
}

/// Value, gradient and Hessian eigenvalues (radial first) of a barrier.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub eigenvalues: Spectrum,
}

impl BarrierFamily {
    pub fn new(n: usize, k: usize, eps: f64, c: f64) -> Result<Self> {
        check_dimensions(n, k)?;
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::Domain(format!("ε must be finite and >= 0, got {eps}")));
        }
        if !(c > 0.0) {
            return Err(Error::Domain(format!("amplitude must be positive, got {c}")));
        }
        Ok(BarrierFamily {
            n,
            k,
            alpha0: alpha0(n, k),
            eps,
            c,
        })
    }

    pub fn value(&self, r: f64) -> f64 {
        -self.c * (r + self.eps).powf(-self.alpha0)
    }

    pub fn dr(&self, r: f64) -> f64 {
        self.c * self.alpha0 * (r + self.eps).powf(-self.alpha0 - 1.0)
    }

    pub fn drr(&self, r: f64) -> f64 {
        -self.c * self.alpha0 * (self.alpha0 + 1.0) * (r + self.eps).powf(-self.alpha0 - 2.0)
    }

    /// `(φ_rr, φ_r / r)`: the radial and the `(n−1)`-fold tangential eigenvalue.
    pub fn eigen_pair(&self, r: f64) -> (f64, f64) {
        let ratio = self.n as f64 / self.k as f64;
        let common = self.c * self.alpha0 * (r + self.eps).powf(-ratio);
        (common * (1.0 - ratio), common * (1.0 + self.eps / r))
    }
}

/// Evaluates the barrier at a point `x ∈ ℝⁿ ∖ {0}`.
pub fn phi_barrier(family: &BarrierFamily, x: &[f64]) -> Result<BarrierEval> {
    if x.len() != family.n {
        return Err(Error::Domain(format!("point has dimension {}, expected {}", x.len(), family.n)));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::Domain("barrier is singular at the origin".into()));
    }
    let dr = family.dr(r);
    let (radial, tangential) = family.eigen_pair(r);
    let mut eig = vec![tangential; family.n];
    eig[0] = radial;
    Ok(BarrierEval {
        value: family.value(r),
        gradient: x.iter().map(|v| dr * v / r).collect(),
        eigenvalues: Spectrum::new(eig)?,
    })
}

/// `σ_k(D²φ(x, 1))` in closed form:
/// `(1+ε/r)^{k−1} C(n−1,k) (ε/r) (r+ε)^{−n} α₀^k`.
pub fn f_eps(n: usize, k: usize, eps: f64, r: f64) -> Result<f64> {
    if n <= 2 * k {
        return Err(Error::Domain(format!("need n > 2k, got n = {n}, k = {k}")));
    }
    if !(r > 0.0) || !(eps >= 0.0) {
        return Err(Error::Domain(format!("need r > 0 and ε >= 0, got r = {r}, ε = {eps}")));
    }
    let q = eps / r;
    Ok((1.0 + q).powi(k as i32 - 1)
        * binom(n - 1, k)
        * q
        * (r + eps).powi(-(n as i32))
        * alpha0(n, k).powi(k as i32))
}

/// `μ = −r^{−α₀}` and `μ_r = α₀ r^{−α₀−1}`.
pub fn mu_exact(n: usize, k: usize, r: f64) -> (f64, f64) {
    let a = alpha0(n, k);
    (-r.powf(-a), a * r.powf(-a - 1.0))
}

/// The exterior solution for `Ω = B_{ρ₀}`: `−(ρ₀/r)^{α₀}`.
pub fn radial_ball_solution(n: usize, k: usize, rho0: f64, r: f64) -> Result<f64> {
    check_dimensions(n, k)?;
    if !(rho0 > 0.0) || r < rho0 {
        return Err(Error::Domain(format!("need r >= ρ₀ > 0, got r = {r}, ρ₀ = {rho0}")));
    }
    Ok(-(rho0 / r).powf(alpha0(n, k)))
}

/// Asymptotic constant of [`radial_ball_solution`]: `ρ₀^{α₀}`.
pub fn ball_gamma(n: usize, k: usize, rho0: f64) -> f64 {
    rho0.powf(alpha0(n, k))
}

/// `S_{n/2}(D²(C log r − 1))` from the eigenvalues `(−C/r², C/r², …)`.
pub fn log_solution_check(n: usize, c: f64, r: f64) -> Result<f64> {
    if n % 2 != 0 {
        return Err(Error::Domain(format!("log solutions need even n, got {n}")));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let mut eig = vec![c / (r * r); n];
    eig[0] = -c / (r * r);
    Ok(elem_sym_all(&eig, n / 2)[n / 2])
}

/// How the barrier margin `δ` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaRule {
    /// Smallest value on [`DELTA_LADDER`] meeting every selection condition.
    Adaptive,
    Fixed(f64),
}

/// Candidate margins for [`DeltaRule::Adaptive`], ascending.
pub const DELTA_LADDER: [f64; 9] = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 2e-2, 5e-2, 0.1, 0.2];

/// Options for [`ApproxProblem::new`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxOptions {
    /// Outer radius; `None` uses `50 · max ρ`.
    pub r_outer: Option<f64>,
    pub eps: f64,
    /// `R` must exceed `margin · max ρ`.
    pub margin: f64,
    /// `ε` must stay below this.
    pub eps0: f64,
    pub delta: DeltaRule,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions {
            r_outer: None,
            eps: 1e-4,
            margin: 10.0,
            eps0: 1e-2,
            delta: DeltaRule::Adaptive,
        }
    }
}

/// Data of `S_k(D²u) = f_ε` in `B_R ∖ Ω̄`, `u = −1` on `∂Ω`,
/// `u = φ(x, C₀)` on `∂B_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxProblem {
    pub n: usize,
    pub k: usize,
    pub r_outer: f64,
    pub eps: f64,
    pub surface: RadialSurface,
    pub c0: f64,
    pub c1: f64,
    pub delta: f64,
    pub b_r: f64,
    pub certificate: AdmissibilityCertificate,
}

const BOUNDARY_SAMPLES: usize = 2048;

fn boundary_extremes(surface: &RadialSurface, eps: f64, a0: f64) -> (f64, f64) {
    (0..=BOUNDARY_SAMPLES)
        .map(|j| {
            let t = std::f64::consts::PI * j as f64 / BOUNDARY_SAMPLES as f64;
            (surface.rho(t) + eps).powf(a0)
        })
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

impl ApproxProblem {
    pub fn new(surface: RadialSurface, k: usize, opts: ApproxOptions) -> Result<Self> {
        let n = surface.n();
        check_dimensions(n, k)?;
        let certificate = certify_admissible(&surface, k)?;
        let (_, rho_max) = surface.rho_range();
        if !(opts.eps >= 0.0) || opts.eps >= opts.eps0 {
            return Err(Error::Domain(format!(
                "ε = {} must lie in [0, {})",
                opts.eps, opts.eps0
            )));
        }
        let r_outer = opts.r_outer.unwrap_or(50.0 * rho_max);
        if r_outer <= opts.margin * rho_max {
            return Err(Error::Domain(format!(
                "outer radius {r_outer} must exceed {} · max ρ = {}",
                opts.margin,
                opts.margin * rho_max
            )));
        }
        let a0 = alpha0(n, k);
        let (lo, hi) = boundary_extremes(&surface, opts.eps, a0);
        let candidates: Vec<f64> = match opts.delta {
            DeltaRule::Adaptive => DELTA_LADDER.to_vec(),
            DeltaRule::Fixed(d) => vec![d],
        };
        for delta in candidates {
            let c0 = ((1.0 - delta) * lo).min(1.0 - delta);
            let c1 = ((1.0 + delta) * hi).max(1.0 + delta);
            let p = ApproxProblem {
                n,
                k,
                r_outer,
                eps: opts.eps,
                surface: surface.clone(),
                c0,
                c1,
                delta,
                b_r: -c0 * (r_outer + opts.eps).powf(-a0),
                certificate: certificate.clone(),
            };
            if p.selection_holds() {
                return Ok(p);
            }
        }
        Err(Error::Precondition(format!(
            "no barrier margin δ makes φ(·, C₀), φ(·, C₁) and the shifted subsolution \
             bracket the boundary data for R = {r_outer}; increase R"
        )))
    }

    pub fn alpha0(&self) -> f64 {
        alpha0(self.n, self.k)
    }

    pub fn barrier(&self, c: f64) -> BarrierFamily {
        BarrierFamily {
            n: self.n,
            k: self.k,
            alpha0: self.alpha0(),
            eps: self.eps,
            c,
        }
    }

    /// `ū = φ(x, C₁) + (C₁ − C₀)(R + ε)^{−α₀}`.
    pub fn shifted_lower(&self, r: f64) -> f64 {
        self.barrier(self.c1).value(r) + (self.c1 - self.c0) * (self.r_outer + self.eps).powf(-self.alpha0())
    }

    /// The selection conditions: `0 < C₀ < 1 < C₁`, `φ(C₀) > −1 > φ(C₁)` and
    /// `ū < −1` on `∂Ω`, and `R > (2C₁)^{1/α₀}`.
    pub fn selection_holds(&self) -> bool {
        if !(0.0 < self.c0 && self.c0 < 1.0 && 1.0 < self.c1) {
            return false;
        }
        if self.r_outer <= (2.0 * self.c1).powf(1.0 / self.alpha0()) {
            return false;
        }
        let (b0, b1) = (self.barrier(self.c0), self.barrier(self.c1));
        (0..=BOUNDARY_SAMPLES).all(|j| {
            let t = std::f64::consts::PI * j as f64 / BOUNDARY_SAMPLES as f64;
            let rho = self.surface.rho(t);
            b0.value(rho) > -1.0 && b1.value(rho) < -1.0 && self.shifted_lower(rho) < -1.0
        })
    }

    /// Dirichlet data at `(r, θ)` on either boundary piece.
    pub fn outer_value(&self) -> f64 {
        self.b_r
    }

    pub fn f(&self, r: f64) -> f64 {
        f_eps(self.n, self.k, self.eps, r).unwrap_or(0.0)
    }

    /// `[α₀C₀(R+ε)^{−α₀−1}, α₀C₁(R+ε)^{−α₀−1}]`.
    pub fn gradient_band(&self) -> (f64, f64) {
        let s = self.alpha0() * (self.r_outer + self.eps).powf(-self.alpha0() - 1.0);
        (self.c0 * s, self.c1 * s)
    }

    /// `(lower, upper)` at polar coordinates `(r, θ)`.
    pub fn sandwich_at(&self, r: f64, theta: f64) -> Result<(f64, f64)> {
        let rho = self.surface.rho(theta);
        let tol = 1e-12 * self.r_outer;
        if r < rho - tol || r > self.r_outer + tol {
            return Err(Error::Domain(format!(
                "r = {r} at θ = {theta} is outside the annulus [{rho}, {}]",
                self.r_outer
            )));
        }
        let lower = self.barrier(self.c1).value(r).max(self.shifted_lower(r));
        Ok((lower, self.barrier(self.c0).value(r)))
    }
}

/// `(max(φ(x,C₁), ū(x)), φ(x,C₀))` at a Cartesian point; the first
/// coordinate is the symmetry axis.
pub fn sandwich_bounds(problem: &ApproxProblem, x: &[f64]) -> Result<(f64, f64)> {
    if x.len() != problem.n {
        return Err(Error::Domain(format!("point has dimension {}, expected {}", x.len(), problem.n)));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::Domain("origin lies inside Ω".into()));
    }
    let theta = (x[0] / r).clamp(-1.0, 1.0).acos();
    problem.sandwich_at(r, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn barrier_eigenvalues() {
        let fam = BarrierFamily::new(5, 2, 0.0, 1.0).unwrap();
        let ev = phi_barrier(&fam, &[0.6, 0.8, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(ev.eigenvalues.values(), &[-0.75, 0.5, 0.5, 0.5, 0.5]);
        assert_eq!(ev.value, -1.0);
        assert!((ev.gradient[0] - 0.3).abs() < 1e-15 && (ev.gradient[1] - 0.4).abs() < 1e-15);
        assert!(phi_barrier(&fam, &[0.0; 5]).is_err());
    }

    #[test]
    fn f_eps_values() {
        let v = f_eps(5, 2, 0.1, 1.0).unwrap();
        assert!((v - 0.1024520183047606).abs() < 1e-15, "{v}");
        assert_eq!(f_eps(7, 3, 0.0, 2.0).unwrap(), 0.0);
        assert!(f_eps(4, 2, 0.1, 1.0).is_err());
    }

    #[test]
    fn f_eps_matches_sigma_of_barrier() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let r = rng.random_range(0.2..20.0);
            let eps = rng.random_range(0.0..0.5);
            let fam = BarrierFamily::new(7, 3, eps, 1.0).unwrap();
            let (a, b) = fam.eigen_pair(r);
            let mut eig = vec![b; 7];
            eig[0] = a;
            let s = elem_sym_all(&eig, 3)[3];
            let f = f_eps(7, 3, eps, r).unwrap();
            assert!((s - f).abs() <= 1e-12 * f.abs().max(1e-300) + 1e-15 * b.abs().powi(3), "{s} vs {f}");
        }
    }

    #[test]
    fn f_eps_tail_slope() {
        let (r1, r2) = (1e3, 1e4);
        let s = (f_eps(5, 2, 1e-3, r2).unwrap().ln() - f_eps(5, 2, 1e-3, r1).unwrap().ln()) / (r2 / r1).ln();
        assert!((s + 6.0).abs() < 0.01, "{s}");
    }

    #[test]
    fn closed_forms() {
        assert_eq!(mu_exact(5, 2, 1.0), (-1.0, 0.5));
        // α₀ = 1 for (6, 2): μ(4) = -1/4, μ_r(4) = 1/16.
        assert_eq!(mu_exact(6, 2, 4.0), (-0.25, 0.0625));
        assert_eq!(radial_ball_solution(5, 2, 2.0, 2.0).unwrap(), -1.0);
        assert!((ball_gamma(5, 2, 2.0) - 2f64.sqrt()).abs() < 1e-15);
        assert!(radial_ball_solution(5, 2, 2.0, 1.0).is_err());
        assert_eq!(log_solution_check(4, 1.0, 1.0).unwrap(), 0.0);
        assert!(log_solution_check(4, 7.0, 3.0).unwrap().abs() < 1e-12);
        assert!(log_solution_check(6, 1.0, 2.0).unwrap().abs() < 1e-12);
        assert!(log_solution_check(5, 1.0, 2.0).is_err());
    }

    #[test]
    fn half_dimension_rejected_with_log_message() {
        let err = BarrierFamily::new(4, 2, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::Rejected(ref m) if m.contains("log")), "{err}");
    }

    #[test]
    fn problem_selection() {
        let ball = RadialSurface::ball(5, 1.0).unwrap();
        let p = ApproxProblem::new(
            ball,
            2,
            ApproxOptions {
                r_outer: Some(100.0),
                eps: 1e-6,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(p.delta, 1e-4);
        assert!(p.c0 < 1.0 && p.c1 > 1.0);

        let s = RadialSurface::new(5, vec![1.0, 0.0, 0.1]).unwrap();
        let p = ApproxProblem::new(s, 2, ApproxOptions::default()).unwrap();
        assert!(p.selection_holds());
        assert!((p.r_outer - 55.0).abs() < 1e-12);
        let fixed = ApproxProblem::new(
            p.surface.clone(),
            2,
            ApproxOptions {
                delta: DeltaRule::Fixed(0.05),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(fixed.delta, 0.05);
    }

    #[test]
    fn sandwich_contains_ball_solution() {
        let p = ApproxProblem::new(
            RadialSurface::ball(5, 1.0).unwrap(),
            2,
            ApproxOptions {
                r_outer: Some(100.0),
                eps: 1e-6,
                ..Default::default()
            },
        )
        .unwrap();
        let (lo, hi) = p.sandwich_at(1.0, 0.3).unwrap();
        assert!(lo <= -1.0 && -1.0 <= hi);
        let (lo, hi) = p.sandwich_at(100.0, 0.3).unwrap();
        assert!((hi - p.b_r).abs() < 1e-15 && (lo - p.b_r).abs() < 1e-12);
        assert!(sandwich_bounds(&p, &[0.5, 0.0, 0.0, 0.0, 0.0]).is_err());
    }
}
