//! Spherical-coordinate Hessians, curvature of star-shaped radial graphs and
//! the `g = r/ρ(θ)` subsolution.
//!
//! Surfaces are axisymmetric: `ρ` depends only on the polar angle `θ ∈ [0, π]`
//! measured from the symmetry axis, and is stored as a finite cosine series,
//! so it is smooth and automatically even across both poles.

mod curvature;
mod spherical;
mod subsolution;

pub use curvature::{
    boundary_curvature, certify_admissible, check_admissible_domain, AdmissibilityCertificate,
    BoundaryPointData,
};
pub use spherical::{
    axisym_hessian_eigs, spherical_hessian, AxisymDerivs, AxisymHessian, SphereDerivs,
};
pub use subsolution::{
    hessian_of_g, select_subsolution_n, subsolution_sigma_k, SubsolutionParams, SubsolutionSearch,
};

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Boundary `{ρ(θ)·ξ : ξ ∈ S^{n−1}}` with `ρ(θ) = a₀ + Σ a_m cos(mθ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSurface {
    n: usize,
    coeffs: Vec<f64>,
}

impl RadialSurface {
    /// Checks `n >= 3`, finite coefficients and `ρ > 0` on a dense sample.
    pub fn new(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("ambient dimension must be >= 3, got {n}")));
        }
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("cosine coefficients must be finite and non-empty".into()));
        }
        let s = RadialSurface { n, coeffs };
        let samples = 4096;
        for j in 0..=samples {
            let theta = PI * j as f64 / samples as f64;
            let rho = s.rho(theta);
            if rho <= 0.0 {
                return Err(Error::Inadmissible {
                    reason: "radial function is not positive".into(),
                    worst_theta: theta,
                    margin: rho,
                });
            }
        }
        Ok(s)
    }

    /// The round sphere of radius `rho0`.
    pub fn ball(n: usize, rho0: f64) -> Result<Self> {
        Self::new(n, vec![rho0])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_ball(&self) -> bool {
        self.coeffs.iter().skip(1).all(|&c| c == 0.0)
    }

    /// `d^order ρ / dθ^order` for `order <= 3`.
    pub fn derivative(&self, theta: f64, order: u32) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(m, &a)| {
                let mf = m as f64;
                let x = mf * theta;
                let base = match order % 4 {
                    0 => x.cos(),
                    1 => -x.sin(),
                    2 => -x.cos(),
                    _ => x.sin(),
                };
                a * mf.powi(order as i32) * base
            })
            .sum::<f64>()
    }

    pub fn rho(&self, theta: f64) -> f64 {
        self.derivative(theta, 0)
    }

    pub fn rho_prime(&self, theta: f64) -> f64 {
        self.derivative(theta, 1)
    }

    pub fn rho_second(&self, theta: f64) -> f64 {
        self.derivative(theta, 2)
    }

    /// `(min ρ, max ρ)` over a dense sample.
    pub fn rho_range(&self) -> (f64, f64) {
        let samples = 4096;
        (0..=samples)
            .map(|j| self.rho(PI * j as f64 / samples as f64))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

impl fmt::Display for RadialSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coeffs[0])?;
        for (m, &a) in self.coeffs.iter().enumerate().skip(1) {
            if a == 0.0 {
                continue;
            }
            let sign = if a < 0.0 { '-' } else { '+' };
            write!(f, " {sign} {}*cos({m}*theta)", a.abs())?;
        }
        Ok(())
    }
}

/// A parsed domain specification `n=<int> k=<int> rho = a0 [+ a_m*cos(m*theta)]...`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub n: usize,
    pub k: usize,
    pub surface: RadialSurface,
}

impl DomainSpec {
    pub fn to_text(&self) -> String {
        format!("n={} k={} rho = {}", self.n, self.k, self.surface)
    }
}

/// Parses the domain text format. Does not run the admissibility certificate.
pub fn parse_domain_spec(text: &str) -> Result<DomainSpec> {
    let rho_at = text
        .find("rho")
        .ok_or_else(|| Error::Parse("missing key `rho`".into()))?;
    let (head, tail) = text.split_at(rho_at);
    let expr = tail["rho".len()..]
        .trim_start()
        .strip_prefix('=')
        .ok_or_else(|| Error::Parse("expected `=` after `rho`".into()))?;

    let mut n = None;
    let mut k = None;
    let compact = head.replace(" =", "=").replace("= ", "=");
    for tok in compact.split_whitespace() {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{tok}`")))?;
        let parsed: usize = value
            .parse()
            .map_err(|_| Error::Parse(format!("key `{key}`: `{value}` is not an integer")))?;
        match key {
            "n" => n = Some(parsed),
            "k" => k = Some(parsed),
            other => return Err(Error::Parse(format!("unknown key `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| Error::Parse("missing key `n`".into()))?;
    let k = k.ok_or_else(|| Error::Parse("missing key `k`".into()))?;
    let coeffs = parse_cosine_series(expr)?;
    Ok(DomainSpec {
        n,
        k,
        surface: RadialSurface::new(n, coeffs)?,
    })
}

fn parse_cosine_series(expr: &str) -> Result<Vec<f64>> {
    let s: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty expression for `rho`".into()));
    }
    // Split into signed terms at top-level +/- (not inside parentheses, not exponents).
    let bytes = s.as_bytes();
    let mut terms = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for i in 0..bytes.len() {
        match bytes[i] {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 && i > start => {
                let prev = bytes[i - 1];
                if prev != b'e' && prev != b'E' && prev != b'*' {
                    terms.push(&s[start..i]);
                    start = i;
                }
            }
            _ => {}
        }
    }
    terms.push(&s[start..]);

    let mut coeffs = vec![0.0];
    for term in terms {
        let (sign, body) = match term.as_bytes()[0] {
            b'-' => (-1.0, &term[1..]),
            b'+' => (1.0, &term[1..]),
            _ => (1.0, term),
        };
        if body.is_empty() {
            return Err(Error::Parse(format!("dangling sign in `{expr}`")));
        }
        let (coef, mode) = match body.find("cos(") {
            None => (parse_number(body)?, 0usize),
            Some(pos) => {
                let coef = if pos == 0 {
                    1.0
                } else {
                    let c = body[..pos]
                        .strip_suffix('*')
                        .ok_or_else(|| Error::Parse(format!("expected `*` before cos in `{body}`")))?;
                    parse_number(c)?
                };
                let inner = body[pos + 4..]
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Parse(format!("unbalanced parentheses in `{body}`")))?;
                let m = if inner == "theta" {
                    1
                } else {
                    let mult = inner
                        .strip_suffix("*theta")
                        .ok_or_else(|| Error::Parse(format!("expected `m*theta`, got `{inner}`")))?;
                    mult.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("mode `{mult}` is not an integer")))?
                };
                (coef, m)
            }
        };
        if coeffs.len() <= mode {
            coeffs.resize(mode + 1, 0.0);
        }
        coeffs[mode] += sign * coef;
    }
    Ok(coeffs)
}

fn parse_number(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Parse(format!("`{s}` is not a number")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ball_and_series() {
        let d = parse_domain_spec("n=5 k=2 rho=1").unwrap();
        assert_eq!((d.n, d.k), (5, 2));
        assert_eq!(d.surface.coeffs(), &[1.0]);
        let d = parse_domain_spec("n=5 k=2 rho = 1 + 0.1*cos(2*theta) - 0.02*cos(4*theta)").unwrap();
        assert_eq!(d.surface.coeffs(), &[1.0, 0.0, 0.1, 0.0, -0.02]);
        let d = parse_domain_spec("k=2 n=6 rho = 2 - cos(theta)*0 + 1e-2*cos(theta)");
        assert!(d.is_err());
        let d = parse_domain_spec("k=2 n=6 rho = 2 + 1e-2*cos(theta)").unwrap();
        assert_eq!(d.surface.coeffs(), &[2.0, 0.01]);
    }

    #[test]
    fn missing_key_is_named() {
        let err = parse_domain_spec("n=5 rho = 1").unwrap_err();
        assert!(err.to_string().contains("`k`"), "{err}");
        let err = parse_domain_spec("n=5 k=2").unwrap_err();
        assert!(err.to_string().contains("`rho`"), "{err}");
    }

    #[test]
    fn display_round_trips() {
        let d = parse_domain_spec("n=5 k=2 rho = 1 + 0.1*cos(2*theta)").unwrap();
        let again = parse_domain_spec(&d.to_text()).unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn rejects_non_positive_radius() {
        assert!(RadialSurface::new(5, vec![0.5, 0.0, 0.6]).is_err());
    }

    #[test]
    fn axis_smoothness() {
        let s = RadialSurface::new(5, vec![1.0, 0.3, 0.1, -0.05]).unwrap();
        assert!(s.rho_prime(0.0).abs() < 1e-15);
        assert!(s.rho_prime(PI).abs() < 1e-14);
    }
}
