//! Elementary symmetric functions, Newton tensors and Gårding cones.
//!
//! Everything here is a pure function of its arguments. `S_k` is always
//! evaluated from the coefficients of `∏(1 + t λ_i)`, never by summing over
//! subsets, so the cost is `O(n k)` and mixed-sign spectra do not suffer the
//! cancellation that subset enumeration produces.

mod kato;
pub mod sample;

pub use kato::{kato_gap, kato_gap_with_tol, KatoConfig, KatoOutcome};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Ordered list of real eigenvalues. Operations are symmetric in the entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Domain(format!(
                "spectrum needs at least two entries, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite eigenvalue {bad}")));
        }
        Ok(Spectrum(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest absolute entry (0 for the zero spectrum).
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl AsRef<[f64]> for Spectrum {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Dense symmetric matrix. Only `set` writes, and it writes both halves.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds a matrix from the upper triangle of `f` (`f(i, j)` with `i <= j`).
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Symmetrizes an arbitrary square matrix as `(A + Aᵀ)/2`.
    pub fn from_dmatrix_symmetrized(a: &DMatrix<f64>) -> Self {
        let dim = a.nrows();
        Self::from_upper(dim, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    /// `trace(self · other)` for two symmetric matrices.
    pub fn frobenius_dot(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Eigenvalues, in the order returned by the symmetric solver.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.check_finite()?;
        Ok(SymmetricEigen::new(self.to_dmatrix())
            .eigenvalues
            .iter()
            .copied()
            .collect())
    }

    fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain("matrix has non-finite entries".into()))
        }
    }
}

/// All elementary symmetric polynomials `S_0..=S_kmax` of `values`.
///
/// Entries above `values.len()` are zero.
pub fn elem_sym_all(values: &[f64], kmax: usize) -> Vec<f64> {
    let mut e = vec![0.0; kmax + 1];
    e[0] = 1.0;
    for (count, &lam) in values.iter().enumerate() {
        let top = kmax.min(count + 1);
        for j in (1..=top).rev() {
            e[j] += lam * e[j - 1];
        }
    }
    e
}

fn elem_sym_slice(values: &[f64], k: usize) -> f64 {
    if k > values.len() {
        return 0.0;
    }
    elem_sym_all(values, k)[k]
}

/// `S_k(λ)`; `k = 0` gives 1.
pub fn elem_sym(lambda: &Spectrum, k: i64) -> Result<f64> {
    let n = lambda.len() as i64;
    if k < 0 || k > n {
        return Err(Error::Domain(format!("k = {k} outside 0..={n}")));
    }
    Ok(elem_sym_slice(lambda.values(), k as usize))
}

/// `S_k` of the spectrum with the listed indices removed.
pub fn elem_sym_omit(lambda: &Spectrum, k: i64, omit: &[usize]) -> Result<f64> {
    let n = lambda.len();
    if omit.is_empty() || omit.len() > 2 {
        return Err(Error::Domain(format!(
            "omit set must have one or two indices, got {}",
            omit.len()
        )));
    }
    if let Some(&bad) = omit.iter().find(|&&i| i >= n) {
        return Err(Error::Domain(format!("index {bad} out of range for n = {n}")));
    }
    if omit.len() == 2 && omit[0] == omit[1] {
        return Err(Error::Domain(format!("repeated index {}", omit[0])));
    }
    let remaining = (n - omit.len()) as i64;
    if k < 0 || k > remaining {
        return Err(Error::Domain(format!("k = {k} outside 0..={remaining}")));
    }
    Ok(omitted_sym(lambda.values(), k, omit))
}

/// `S_k(λ | omit)` with the convention `S_k = 0` for `k < 0` or `k` above the
/// remaining length. Used by the adapted-frame formulas, where `S_{k-2}` and
/// `S_{k-3}` appear for small `k`.
pub(crate) fn omitted_sym(values: &[f64], k: i64, omit: &[usize]) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let kept: Vec<f64> = values
        .iter()
        .enumerate()
        .filter(|(i, _)| !omit.contains(i))
        .map(|(_, &v)| v)
        .collect();
    elem_sym_slice(&kept, k as usize)
}

/// `S_k` with `S_k = 0` for negative `k` or `k > len`.
pub(crate) fn sym_or_zero(values: &[f64], k: i64) -> f64 {
    if k < 0 {
        0.0
    } else {
        elem_sym_slice(values, k as usize)
    }
}

/// `S_k(A) = S_k(λ[A])`.
pub fn sigma_k_of_matrix(a: &SymMatrix, k: usize) -> Result<f64> {
    let eig = a.eigenvalues()?;
    if k > eig.len() {
        return Err(Error::Domain(format!("k = {k} exceeds dimension {}", eig.len())));
    }
    Ok(elem_sym_slice(&eig, k))
}

/// The Newton tensor `∂S_k/∂A_ij`, computed in the eigenbasis of `A` where it
/// is `diag(S_{k-1}(λ|i))`.
pub fn newton_tensor(a: &SymMatrix, k: usize) -> Result<SymMatrix> {
    a.check_finite()?;
    let n = a.dim();
    if k > n {
        return Err(Error::Domain(format!("k = {k} exceeds dimension {n}")));
    }
    if k == 0 {
        return Ok(SymMatrix::zeros(n));
    }
    let eig = SymmetricEigen::new(a.to_dmatrix());
    let lam: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let diag: Vec<f64> = (0..n)
        .map(|i| omitted_sym(&lam, k as i64 - 1, &[i]))
        .collect();
    let q = &eig.eigenvectors;
    Ok(SymMatrix::from_upper(n, |i, j| {
        (0..n).map(|m| q[(i, m)] * diag[m] * q[(j, m)]).sum()
    }))
}

/// Scale used for the closure tolerance of `S_m`: `max(1, max|λ_i|^m)`.
fn cone_scale(lambda: &[f64], m: usize) -> f64 {
    let big = lambda.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    1.0_f64.max(big.powi(m as i32))
}

/// Default relative slack for closure membership.
pub const CONE_TOL: f64 = 1e-12;

/// Membership in `Γ_k` (strict) or its closure (with relative slack `CONE_TOL`).
pub fn in_gamma_k(lambda: &Spectrum, k: usize, strict: bool) -> bool {
    in_gamma_k_tol(lambda.values(), k, strict, CONE_TOL)
}

pub fn in_gamma_k_tol(lambda: &[f64], k: usize, strict: bool, tol: f64) -> bool {
    let s = elem_sym_all(lambda, k);
    (1..=k).all(|m| {
        if strict {
            s[m] > 0.0
        } else {
            s[m] >= -tol * cone_scale(lambda, m)
        }
    })
}

/// Scaled margins `S_m(λ) / max(1, max|λ|^m)` for `m = 1..=k`.
pub fn gamma_margins(lambda: &[f64], k: usize) -> Vec<f64> {
    let s = elem_sym_all(lambda, k);
    (1..=k).map(|m| s[m] / cone_scale(lambda, m)).collect()
}

/// Both Newton–Maclaurin gaps used in the Kato argument.
#[derive(Debug, Clone, PartialEq)]
pub struct MaclaurinGaps {
    /// `k(n-k-1)/(n-k) · S_k²/S_{k-1} − (k+1) S_{k+1}`.
    pub product_gap: f64,
    /// `S_{k-1}(λ'|α) − S_k S_{k-2}(λ'|α)/S_{k-1}` for each α.
    pub ratio_gaps: Vec<f64>,
}

/// Newton–Maclaurin gaps for a tangential spectrum `λ'` of length `n - 1`.
pub fn maclaurin_gaps(lambda_prime: &Spectrum, k: usize) -> Result<MaclaurinGaps> {
    let lp = lambda_prime.values();
    let n = lp.len() + 1;
    if k == 0 || k + 1 > n - 1 {
        return Err(Error::Domain(format!("k = {k} invalid for n = {n}")));
    }
    let s = elem_sym_all(lp, k + 1);
    let (skm1, sk, skp1) = (s[k - 1], s[k], s[k + 1]);
    if skm1 <= 0.0 {
        return Err(Error::Precondition(format!(
            "S_{{k-1}}(λ') = {skm1:e} must be positive"
        )));
    }
    let kf = k as f64;
    let nf = n as f64;
    let product_gap = kf * (nf - kf - 1.0) / (nf - kf) * sk * sk / skm1 - (kf + 1.0) * skp1;
    let ratio_gaps = (0..lp.len())
        .map(|a| {
            omitted_sym(lp, k as i64 - 1, &[a]) - sk * omitted_sym(lp, k as i64 - 2, &[a]) / skm1
        })
        .collect();
    Ok(MaclaurinGaps { product_gap, ratio_gaps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec()).unwrap()
    }

    #[test]
    fn elem_sym_small_cases() {
        assert_eq!(elem_sym(&spec(&[1.0, 2.0, 3.0]), 2).unwrap(), 11.0);
        assert_eq!(elem_sym(&spec(&[1.0; 4]), 3).unwrap(), 4.0);
        assert_eq!(elem_sym(&spec(&[1.0, 2.0]), 0).unwrap(), 1.0);
        let mu = spec(&[-0.75, 0.5, 0.5, 0.5, 0.5]);
        assert!(elem_sym(&mu, 2).unwrap().abs() < 1e-15);
    }

    #[test]
    fn elem_sym_rejects_bad_k() {
        let l = spec(&[1.0, 2.0, 3.0]);
        assert!(matches!(elem_sym(&l, -1), Err(Error::Domain(_))));
        assert!(matches!(elem_sym(&l, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn spectrum_rejects_non_finite() {
        assert!(Spectrum::new(vec![1.0, f64::NAN]).is_err());
        assert!(Spectrum::new(vec![1.0]).is_err());
    }

    #[test]
    fn omit_examples() {
        assert_eq!(elem_sym_omit(&spec(&[1.0, 2.0, 3.0]), 2, &[0]).unwrap(), 6.0);
        assert_eq!(elem_sym_omit(&spec(&[1.0, 2.0, 3.0, 4.0]), 1, &[1, 3]).unwrap(), 4.0);
        assert_eq!(elem_sym_omit(&spec(&[5.0, -2.0, 7.0]), 0, &[2]).unwrap(), 1.0);
        assert_eq!(elem_sym_omit(&spec(&[5.0, -2.0, 7.0]), 0, &[0, 2]).unwrap(), 1.0);
        assert!(matches!(
            elem_sym_omit(&spec(&[1.0, 2.0, 3.0]), 1, &[1, 1]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn sigma_of_matrix_examples() {
        assert!((sigma_k_of_matrix(&SymMatrix::identity(4), 2).unwrap() - 6.0).abs() < 1e-13);
        let d = SymMatrix::from_diagonal(&[-0.75, 0.5, 0.5, 0.5, 0.5]);
        assert!(sigma_k_of_matrix(&d, 2).unwrap().abs() < 1e-14);
        let mut bad = SymMatrix::identity(3);
        bad.set(0, 1, f64::INFINITY);
        assert!(sigma_k_of_matrix(&bad, 2).is_err());
    }

    #[test]
    fn newton_tensor_examples() {
        let t = newton_tensor(&SymMatrix::from_diagonal(&[1.0, 2.0, 3.0]), 2).unwrap();
        let expect = [5.0, 4.0, 3.0];
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { expect[i] } else { 0.0 };
                assert!((t.get(i, j) - e).abs() < 1e-13, "({i},{j})");
            }
        }
        let t = newton_tensor(&SymMatrix::identity(5), 2).unwrap();
        for i in 0..5 {
            assert!((t.get(i, i) - 4.0).abs() < 1e-13);
        }
    }

    #[test]
    fn cone_examples() {
        assert!(in_gamma_k(&spec(&[1.0, 1.0, 1.0]), 3, true));
        assert!(!in_gamma_k(&spec(&[1.0, 1.0, -0.5]), 2, true));
        assert!(in_gamma_k(&spec(&[-0.75, 0.5, 0.5, 0.5, 0.5]), 2, false));
        assert!(!in_gamma_k(&spec(&[-0.75, 0.5, 0.5, 0.5, 0.5]), 2, true));
    }

    #[test]
    fn maclaurin_examples() {
        let g = maclaurin_gaps(&spec(&[1.0, 1.0, 1.0, 1.0]), 2).unwrap();
        assert!(g.product_gap.abs() < 1e-13, "{}", g.product_gap);
        let g = maclaurin_gaps(&spec(&[1.0, 0.0, 0.0, 0.0]), 2).unwrap();
        assert_eq!(g.product_gap, 0.0);
        assert_eq!(g.ratio_gaps, vec![0.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            maclaurin_gaps(&spec(&[-1.0, 0.0, 0.0, 0.0]), 2),
            Err(Error::Precondition(_))
        ));
    }
}
