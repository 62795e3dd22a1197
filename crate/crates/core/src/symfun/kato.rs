//! Kato's inequality for solutions of `S_k(D²u) = 0`, assembled in the frame
//! where `e_n = Du/|Du|` and the tangential block is diagonal.

use super::{omitted_sym, sym_or_zero, SymMatrix};
use crate::error::{Error, Result};
use crate::symfun::{in_gamma_k_tol, Spectrum};

/// Pointwise data of `D²u` in the adapted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct KatoConfig {
    pub n: usize,
    pub k: usize,
    /// Tangential eigenvalues `λ'` (length `n - 1`).
    pub lambda_prime: Spectrum,
    /// Mixed entries `u_{αn}`, `α = 1..n-1`.
    pub mixed: Vec<f64>,
    /// Normal-normal entry. `None` means "solve it from `S_k(D²u) = 0`".
    pub u_nn: Option<f64>,
}

/// Result of a Kato evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KatoOutcome {
    /// `Σ_m S_k^{ij} u_{im} u_{mj} − n/(n−k) S_k^{ij} u_{in} u_{jn}`.
    pub gap: f64,
    /// The `u_nn` actually used.
    pub u_nn: f64,
    /// True when `S_{k-1}(λ') = 0` (the degenerate branch).
    pub degenerate: bool,
}

impl KatoConfig {
    pub fn new(n: usize, k: usize, lambda_prime: Spectrum, mixed: Vec<f64>) -> Result<Self> {
        let cfg = KatoConfig {
            n,
            k,
            lambda_prime,
            mixed,
            u_nn: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_u_nn(mut self, u_nn: f64) -> Self {
        self.u_nn = Some(u_nn);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n <= 2 * self.k {
            return Err(Error::Domain(format!(
                "need n > 2k >= 2, got n = {}, k = {}",
                self.n, self.k
            )));
        }
        if self.lambda_prime.len() != self.n - 1 || self.mixed.len() != self.n - 1 {
            return Err(Error::Domain(format!(
                "frame data must have length n - 1 = {}",
                self.n - 1
            )));
        }
        if self.mixed.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite mixed entry".into()));
        }
        if !in_gamma_k_tol(self.lambda_prime.values(), self.k - 1, false, 1e-12) {
            return Err(Error::Precondition("λ' is not in the closure of Γ_{k-1}".into()));
        }
        Ok(())
    }

    /// The full `n × n` Hessian in the adapted frame (normal direction last).
    pub fn hessian(&self, u_nn: f64) -> SymMatrix {
        let n = self.n;
        let lp = self.lambda_prime.values();
        SymMatrix::from_upper(n, |i, j| match (i, j) {
            (i, j) if i == j && i < n - 1 => lp[i],
            (i, j) if i < n - 1 && j == n - 1 => self.mixed[i],
            (i, j) if i == n - 1 && j == n - 1 => u_nn,
            _ => 0.0,
        })
    }

    /// `u_nn` solving `S_{k-1}(λ')u_nn + S_k(λ') − Σ S_{k-2}(λ'|α)u_{αn}² = 0`.
    pub fn solved_u_nn(&self) -> Result<f64> {
        let lp = self.lambda_prime.values();
        let k = self.k as i64;
        let skm1 = sym_or_zero(lp, k - 1);
        if skm1 <= 0.0 {
            return Err(Error::Precondition(
                "S_{k-1}(λ') vanishes; u_nn cannot be solved for".into(),
            ));
        }
        let mixed_sum: f64 = (0..lp.len())
            .map(|a| omitted_sym(lp, k - 2, &[a]) * self.mixed[a] * self.mixed[a])
            .sum();
        Ok((mixed_sum - sym_or_zero(lp, k)) / skm1)
    }
}

/// Left side of Kato's inequality with the default degeneracy tolerance.
pub fn kato_gap(cfg: &KatoConfig) -> Result<f64> {
    kato_gap_with_tol(cfg, 1e-12).map(|o| o.gap)
}

/// Left side of Kato's inequality. `tol` is the relative slack under which
/// `S_{k-1}(λ')` is treated as zero and the consistency conditions of that
/// branch are checked.
pub fn kato_gap_with_tol(cfg: &KatoConfig, tol: f64) -> Result<KatoOutcome> {
    cfg.validate()?;
    let n = cfg.n;
    let k = cfg.k as i64;
    let lp = cfg.lambda_prime.values();
    let m = &cfg.mixed;
    let scale = 1.0_f64.max(cfg.lambda_prime.max_abs()).max(m.iter().fold(0.0_f64, |a, v| a.max(v.abs())));

    let skm1 = sym_or_zero(lp, k - 1);
    let degenerate = skm1.abs() <= tol * scale.powi((k - 1) as i32);

    let u_nn = if degenerate {
        // S_k(λ') = 0 and S_{k-2}(λ'|α)u_{αn}² = 0 for every α must hold.
        let sk = sym_or_zero(lp, k);
        let bad_alpha = (0..lp.len())
            .find(|&a| (omitted_sym(lp, k - 2, &[a]) * m[a] * m[a]).abs() > tol * scale.powi(k as i32));
        if sk.abs() > tol * scale.powi(k as i32) || bad_alpha.is_some() {
            return Err(Error::Precondition(
                "S_{k-1}(λ') = 0 but the mixed terms are inconsistent with S_k(D²u) = 0".into(),
            ));
        }
        cfg.u_nn.ok_or_else(|| {
            Error::Precondition("degenerate frame requires an explicit u_nn".into())
        })?
    } else {
        match cfg.u_nn {
            Some(v) => v,
            None => cfg.solved_u_nn()?,
        }
    };

    // Newton tensor in the adapted frame.
    let s_aa = |a: usize| -> f64 {
        let cross: f64 = (0..lp.len())
            .filter(|&b| b != a)
            .map(|b| omitted_sym(lp, k - 3, &[a, b]) * m[b] * m[b])
            .sum();
        omitted_sym(lp, k - 2, &[a]) * u_nn + omitted_sym(lp, k - 1, &[a]) - cross
    };
    let s_an = |a: usize| -> f64 { -omitted_sym(lp, k - 2, &[a]) * m[a] };
    // Off-diagonal tangential entries; identically zero for k <= 2.
    let s_ab = |a: usize, b: usize| -> f64 { omitted_sym(lp, k - 3, &[a, b]) * m[a] * m[b] };
    let s_nn = skm1;

    // S_k^{ij} u_{in} u_{jn}
    let mut quad = s_nn * u_nn * u_nn;
    for a in 0..lp.len() {
        quad += s_aa(a) * m[a] * m[a] + 2.0 * s_an(a) * m[a] * u_nn;
        for b in 0..lp.len() {
            if b != a {
                quad += s_ab(a, b) * m[a] * m[b];
            }
        }
    }

    // Σ_m S_k^{ij} u_{im} u_{mj} = S_1 S_k − (k+1) S_{k+1} of the full Hessian.
    let mixed_sum = |j: i64| -> f64 {
        (0..lp.len())
            .map(|a| omitted_sym(lp, j, &[a]) * m[a] * m[a])
            .sum()
    };
    let s1_full = sym_or_zero(lp, 1) + u_nn;
    let sk_full = sym_or_zero(lp, k - 1) * u_nn + sym_or_zero(lp, k) - mixed_sum(k - 2);
    let skp1_full = sym_or_zero(lp, k) * u_nn + sym_or_zero(lp, k + 1) - mixed_sum(k - 1);
    let trace_term = s1_full * sk_full - (k as f64 + 1.0) * skp1_full;

    let nf = n as f64;
    let gap = trace_term - nf / (nf - k as f64) * quad;
    Ok(KatoOutcome {
        gap,
        u_nn,
        degenerate,
    })
}
