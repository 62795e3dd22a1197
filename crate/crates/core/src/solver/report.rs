//! Post-solve diagnostics: sandwich, boundary gradient band, `γ` and decay fits.

use serde::Serialize;

use super::field::SolutionField;
use crate::barriers::{alpha0, ApproxProblem};
use crate::error::{Error, Result};

/// Observed `|∇u|` on `∂B_R` against `[α₀C₀, α₀C₁]·(R+ε)^{−α₀−1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientBand {
    pub observed_min: f64,
    pub observed_max: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    /// Relative distance outside the band (0 when inside).
    pub rel_violation: f64,
    pub ok: bool,
}

/// Slack allowed on the outer gradient band.
pub const BAND_SLACK: f64 = 0.05;
/// Slack allowed on the sandwich bounds.
pub const SANDWICH_SLACK: f64 = 1e-6;

impl GradientBand {
    pub fn new(problem: &ApproxProblem, grads: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for g in grads {
            lo = lo.min(g);
            hi = hi.max(g);
        }
        let (band_lo, band_hi) = problem.gradient_band();
        let rel_violation = ((band_lo - lo) / band_lo).max((hi - band_hi) / band_hi).max(0.0);
        GradientBand {
            observed_min: lo,
            observed_max: hi,
            band_lo,
            band_hi,
            rel_violation,
            ok: rel_violation <= BAND_SLACK,
        }
    }
}

/// `γ` estimates over the window `r ∈ [R/4, R/2]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaFit {
    /// Median of `u/μ` over all window nodes.
    pub median: f64,
    /// `(max − min)/median` of `u/μ` over the window.
    pub spread: f64,
    /// Median over columns of the least-squares `γ` in `u ≈ a + γμ`, which
    /// removes the constant offset induced by the finite outer radius.
    pub affine: f64,
    pub affine_offset: f64,
    pub affine_spread: f64,
    pub low_confidence: bool,
}

/// Log-log decay slopes of `max_θ |u|`, `|Du|`, `|D²u|` over the window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub exponents: [f64; 3],
    pub expected: [f64; 3],
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Asymptotics {
    pub gamma: GammaFit,
    pub decay: DecayFit,
}

/// One angular column of samples, ordered by increasing `r`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Column {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

fn rel_spread(v: &[f64], center: f64) -> f64 {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (hi - lo) / center.abs()
}

fn interp_log(r: &[f64], v: &[f64], x: f64) -> f64 {
    let p = r.partition_point(|&ri| ri < x).clamp(1, r.len() - 1);
    let (x0, x1) = (r[p - 1].ln(), r[p].ln());
    let (y0, y1) = (v[p - 1].abs().ln(), v[p].abs().ln());
    (y0 + (y1 - y0) * (x.ln() - x0) / (x1 - x0)).exp()
}

/// Fits `γ` and the decay exponents from sampled columns.
pub fn fit_asymptotics(columns: &[Column], n: usize, k: usize, r_outer: f64) -> Result<Asymptotics> {
    let a0 = alpha0(n, k);
    let (w0, w1) = (r_outer / 4.0, r_outer / 2.0);
    let mut ratios = Vec::new();
    let mut affine = Vec::new();
    let mut offsets = Vec::new();
    for col in columns {
        let pts: Vec<(f64, f64)> = col
            .r
            .iter()
            .zip(&col.u)
            .filter(|(r, _)| (w0..=w1).contains(*r))
            .map(|(&r, &u)| (-r.powf(-a0), u))
            .collect();
        ratios.extend(pts.iter().map(|(mu, u)| u / mu));
        if pts.len() >= 3 {
            let m = pts.len() as f64;
            let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
            let (mx, my) = (sx / m, sy / m);
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let g = sxy / sxx;
            affine.push(g);
            offsets.push(my - g * mx);
        }
    }
    if ratios.is_empty() {
        return Err(Error::Precondition(format!(
            "no samples in the fit window [{w0}, {w1}]; refine the grid"
        )));
    }
    let med = median(ratios.clone());
    let spread = rel_spread(&ratios, med);
    let (aff, off, aff_spread) = if affine.is_empty() {
        (med, 0.0, spread)
    } else {
        let g = median(affine.clone());
        (g, median(offsets), rel_spread(&affine, g))
    };

    let radii: Vec<f64> = (0..16).map(|q| w0 * (w1 / w0).powf(q as f64 / 15.0)).collect();
    let slope = |pick: fn(&Column) -> &Vec<f64>| -> f64 {
        let ys: Vec<f64> = radii
            .iter()
            .map(|&x| {
                columns
                    .iter()
                    .map(|c| interp_log(&c.r, pick(c), x))
                    .fold(0.0, f64::max)
                    .ln()
            })
            .collect();
        let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let m = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        -sxy / sxx
    };
    let exponents = [slope(|c| &c.u), slope(|c| &c.grad), slope(|c| &c.hess)];
    let expected = [a0, a0 + 1.0, a0 + 2.0];
    let within_tolerance = exponents.iter().zip(&expected).all(|(e, x)| (e - x).abs() <= 0.1);
    Ok(Asymptotics {
        gamma: GammaFit {
            median: med,
            spread,
            affine: aff,
            affine_offset: off,
            affine_spread: aff_spread,
            low_confidence: spread > 0.1,
        },
        decay: DecayFit {
            exponents,
            expected,
            within_tolerance,
        },
    })
}

/// Columns of a 2-D field (every angular node).
pub fn field_columns(field: &SolutionField) -> Result<Vec<Column>> {
    let g = &field.grid;
    (0..g.ntheta)
        .map(|j| {
            let mut c = Column::default();
            for i in 0..g.ns {
                c.r.push(g.r(i, j));
                c.u.push(field.at(i, j));
                c.grad.push(field.grad_norm(i, j));
                c.hess.push(field.hess_norm(i, j)?);
            }
            Ok(c)
        })
        .collect()
}

/// `γ` and decay exponents of a 2-D field.
pub fn asymptotics_report(field: &SolutionField) -> Result<Asymptotics> {
    let g = &field.grid;
    fit_asymptotics(&field_columns(field)?, g.n, g.k, g.r_outer)
}

/// Everything recorded about an accepted solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub n: usize,
    pub k: usize,
    pub r_outer: f64,
    pub eps: f64,
    pub c0: f64,
    pub c1: f64,
    pub delta: f64,
    pub grid: [usize; 2],
    pub residual_history: Vec<f64>,
    pub final_residual: f64,
    pub iterations: usize,
    /// Smallest scaled `S_m(λ(D²u))`, `m ≤ k`, over interior nodes.
    pub admissibility_margin: f64,
    /// Smallest `min(u − lower, upper − u)` over all nodes.
    pub sandwich_margin: f64,
    pub sandwich_ok: bool,
    pub gradient_band: GradientBand,
    /// `max |∇u|` on `∂Ω` (recorded, not predicted).
    pub inner_gradient_max: f64,
    pub asymptotics: Asymptotics,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RadialSurface;
    use crate::solver::AnnulusGrid;

    #[test]
    fn exact_mu_self_test() {
        let s = RadialSurface::ball(5, 1.0).unwrap();
        let g = AnnulusGrid::new(&s, 2, 100.0, 0.0, 256, 9, None).unwrap();
        let f = SolutionField::from_fn(g, -0.1, |r, _| -r.powf(-0.5));
        let a = asymptotics_report(&f).unwrap();
        assert!((a.gamma.median - 1.0).abs() < 1e-12);
        assert!((a.gamma.affine - 1.0).abs() < 1e-9);
        for (e, x) in a.decay.exponents.iter().zip(a.decay.expected) {
            assert!((e - x).abs() < 5e-4, "{e} vs {x}");
        }
        assert!(a.decay.within_tolerance);
    }

    #[test]
    fn affine_fit_removes_offset() {
        let s = RadialSurface::ball(5, 2.0).unwrap();
        let g = AnnulusGrid::new(&s, 2, 100.0, 0.0, 256, 5, None).unwrap();
        let f = SolutionField::from_fn(g, 0.0, |r, _| 0.004 - 2f64.sqrt() * r.powf(-0.5));
        let a = asymptotics_report(&f).unwrap();
        assert!((a.gamma.affine - 2f64.sqrt()).abs() < 1e-9);
        assert!((a.gamma.affine_offset - 0.004).abs() < 1e-9);
        assert!((a.gamma.median - 2f64.sqrt()).abs() > 1e-3);
    }
}
