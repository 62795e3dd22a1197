//! Randomized identity suites behind `verify-identities`.
//!
//! Each suite draws from its own ChaCha stream (seed mixed with the suite
//! name), so selecting a single suite reproduces the same samples as a full run.

use std::f64::consts::PI;

use khlab_core::barriers::{alpha0, check_dimensions, f_eps, log_solution_check, BarrierFamily};
use khlab_core::geometry::{select_subsolution_n, spherical_hessian, subsolution_sigma_k, RadialSurface, SphereDerivs};
use khlab_core::symfun::{
    elem_sym_all, kato_gap_with_tol, maclaurin_gaps, newton_tensor, sample, sigma_k_of_matrix, KatoConfig, Spectrum,
    SymMatrix,
};
use khlab_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Tolerances;
use crate::error::Result;

pub const SUITES: [&str; 8] = [
    "kato",
    "maclaurin",
    "barriers",
    "spherical",
    "subsolution",
    "newton-divergence",
    "log-solution",
    "euler",
];

/// `(n, k)` pairs exercised by the Kato and Newton–Maclaurin suites.
pub const KATO_DIMS: [(usize, usize); 4] = [(5, 2), (6, 2), (7, 2), (3, 1)];

/// Outcome of one case: `margin ≥ 0` passes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub label: String,
    pub samples: usize,
    pub statistic: String,
    pub worst: f64,
    pub threshold: f64,
    pub margin: f64,
    pub passed: bool,
    /// Inputs of the worst sample, enough to replay it.
    pub worst_sample: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: Vec<CaseReport>,
    pub min_margin: f64,
    pub passed: bool,
}

/// Tracks the extreme statistic and the sample that produced it.
struct Worst {
    value: f64,
    sample: Value,
    maximize: bool,
}

impl Worst {
    fn smallest() -> Self {
        Worst {
            value: f64::INFINITY,
            sample: Value::Null,
            maximize: false,
        }
    }

    fn largest() -> Self {
        Worst {
            value: f64::NEG_INFINITY,
            sample: Value::Null,
            maximize: true,
        }
    }

    fn offer(&mut self, v: f64, sample: impl FnOnce() -> Value) {
        let worse = if self.maximize { v > self.value } else { v < self.value };
        if worse || v.is_nan() && !self.value.is_nan() {
            self.value = v;
            self.sample = sample();
        }
    }

    /// Lower-bound case: passes when `worst ≥ threshold`.
    fn at_least(self, label: String, samples: usize, statistic: &str, threshold: f64) -> CaseReport {
        let margin = self.value - threshold;
        self.finish(label, samples, statistic, threshold, margin)
    }

    /// Upper-bound case: passes when `worst ≤ threshold`.
    fn at_most(self, label: String, samples: usize, statistic: &str, threshold: f64) -> CaseReport {
        let margin = threshold - self.value;
        self.finish(label, samples, statistic, threshold, margin)
    }

    fn finish(self, label: String, samples: usize, statistic: &str, threshold: f64, margin: f64) -> CaseReport {
        CaseReport {
            label,
            samples,
            statistic: statistic.to_string(),
            worst: self.value,
            threshold,
            margin: if margin.is_nan() { f64::NEG_INFINITY } else { margin },
            passed: margin >= 0.0,
            worst_sample: self.sample,
        }
    }
}

fn rng_for(seed: u64, suite: &str) -> ChaCha8Rng {
    // FNV-1a of the suite name keeps streams independent across suites
    let salt = suite
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    ChaCha8Rng::seed_from_u64(seed ^ salt)
}

pub fn default_samples(suite: &str) -> usize {
    match suite {
        "kato" | "maclaurin" => 100_000,
        "barriers" => 100,
        "spherical" => 20,
        "subsolution" => 10_000,
        "newton-divergence" => 12,
        "log-solution" => 1_000,
        _ => 10_000,
    }
}

/// Runs one suite by name.
pub fn run_suite(name: &str, seed: u64, samples: Option<usize>, tol: &Tolerances) -> Result<SuiteReport> {
    let count = samples.unwrap_or_else(|| default_samples(name));
    let mut rng = rng_for(seed, name);
    let cases = match name {
        "kato" => kato(&mut rng, count, tol)?,
        "maclaurin" => maclaurin(&mut rng, count, tol)?,
        "barriers" => barriers(&mut rng, count, tol)?,
        "spherical" => spherical(&mut rng, count, tol)?,
        "subsolution" => subsolution(&mut rng, count)?,
        "newton-divergence" => newton_divergence(&mut rng, count, tol)?,
        "log-solution" => log_solution(&mut rng, count, tol)?,
        "euler" => euler(&mut rng, count, tol)?,
        other => return Err(crate::error::CliError::Config(format!("unknown suite `{other}`"))),
    };
    let min_margin = cases.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    Ok(SuiteReport {
        suite: name.to_string(),
        seed,
        passed: cases.iter().all(|c| c.passed),
        min_margin,
        cases,
    })
}

fn kato_sample(cfg: &KatoConfig, u_nn: f64, gap: f64) -> Value {
    json!({
        "n": cfg.n,
        "k": cfg.k,
        "lambda_prime": cfg.lambda_prime.values(),
        "mixed": cfg.mixed,
        "u_nn": u_nn,
        "gap": gap,
    })
}

fn kato(rng: &mut ChaCha8Rng, count: usize, tol: &Tolerances) -> Result<Vec<CaseReport>> {
    let mut cases = Vec::new();
    for (n, k) in KATO_DIMS {
        let mut worst = Worst::smallest();
        for i in 0..count {
            let cfg = sample::kato_config(rng, n, k, i % 2 == 1);
            // sampled frames have S_{k−1}(λ') > 0, so only an exact zero is degenerate
            let out = kato_gap_with_tol(&cfg, 0.0)?;
            worst.offer(out.gap, || kato_sample(&cfg, out.u_nn, out.gap));
        }
        cases.push(worst.at_least(format!("n={n},k={k}"), count, "min gap", -tol.kato));
    }
    // μ = −r^{−α₀}: tangential α₀r^{−α₀−2}, normal −α₀(α₀+1)r^{−α₀−2}
    for (n, k) in KATO_DIMS {
        let a0 = alpha0(n, k);
        let mut worst = Worst::largest();
        let m = count.clamp(1, 1000);
        for _ in 0..m {
            let r: f64 = rng.random_range(0.5..4.0);
            let s = a0 * r.powf(-a0 - 2.0);
            let cfg = KatoConfig::new(n, k, Spectrum::new(vec![s; n - 1])?, vec![0.0; n - 1])?;
            let out = kato_gap_with_tol(&cfg, 1e-12)?;
            let scale = (s * (a0 + 1.0)).max(s).powi(2);
            let v = (out.gap / scale).abs();
            worst.offer(v, || json!({ "n": n, "k": k, "r": r, "gap": out.gap, "scaled": v }));
        }
        cases.push(worst.at_most(format!("radial n={n},k={k}"), m, "max |gap|/|D²u|²", tol.radial));
    }
    Ok(cases)
}

fn maclaurin(rng: &mut ChaCha8Rng, count: usize, tol: &Tolerances) -> Result<Vec<CaseReport>> {
    let mut cases = Vec::new();
    for (n, k) in KATO_DIMS {
        let mut worst = Worst::smallest();
        let mut drawn = 0;
        while drawn < count {
            let lp = if drawn % 2 == 1 {
                sample::near_boundary(rng, n - 1, k - 1)
            } else {
                sample::interior(rng, n - 1, k - 1)
            };
            let spectrum = Spectrum::new(lp.clone())?;
            let gaps = match maclaurin_gaps(&spectrum, k) {
                Ok(g) => g,
                // S_{k−1}(λ') = 0 is outside the suite's cone
                Err(Error::Precondition(_)) => continue,
                Err(e) => return Err(e.into()),
            };
            drawn += 1;
            let v = gaps.ratio_gaps.iter().copied().fold(gaps.product_gap, f64::min);
            worst.offer(v, || {
                json!({
                    "n": n, "k": k, "lambda_prime": lp,
                    "product_gap": gaps.product_gap, "ratio_gaps": gaps.ratio_gaps,
                })
            });
        }
        cases.push(worst.at_least(format!("n={n},k={k}"), count, "min gap", -tol.maclaurin));
    }
    Ok(cases)
}

/// Five-point second difference of `f` along `v`, fourth order in `h`.
fn second_diff(f: &impl Fn(&[f64]) -> f64, x: &[f64], v: &[f64], h: f64) -> f64 {
    let at = |t: f64| {
        let p: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + t * b).collect();
        f(&p)
    };
    (-at(2.0 * h) + 16.0 * at(h) - 30.0 * at(0.0) + 16.0 * at(-h) - at(-2.0 * h)) / (12.0 * h * h)
}

/// Five-point first difference, fourth order in `h`.
fn first_diff(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
}

/// Hessian by polarization of directional second differences.
pub fn fd_hessian(f: &impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> SymMatrix {
    let n = x.len();
    let unit = |i: usize| -> Vec<f64> { (0..n).map(|m| if m == i { 1.0 } else { 0.0 }).collect() };
    SymMatrix::from_upper(n, |i, j| {
        if i == j {
            second_diff(f, x, &unit(i), h)
        } else {
            let plus: Vec<f64> = (0..n).map(|m| unit(i)[m] + unit(j)[m]).collect();
            let minus: Vec<f64> = (0..n).map(|m| unit(i)[m] - unit(j)[m]).collect();
            (second_diff(f, x, &plus, h) - second_diff(f, x, &minus, h)) / 4.0
        }
    })
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 0.1 && norm <= 1.0 {
            return v.iter().map(|a| a / norm).collect();
        }
    }
}

fn barriers(rng: &mut ChaCha8Rng, count: usize, tol: &Tolerances) -> Result<Vec<CaseReport>> {
    const DIMS: [(usize, usize); 4] = [(5, 2), (6, 2), (7, 3), (3, 1)];
    let mut eig_worst = Worst::largest();
    let mut f_worst = Worst::largest();
    for _ in 0..count {
        let (n, k) = DIMS[rng.random_range(0..DIMS.len())];
        let r: f64 = rng.random_range(0.5..20.0);
        // ε/r log-uniform in [1e-2, 1] keeps σ_k(D²φ) = O(ε/r) resolvable by differences
        let eps = r * 10f64.powf(rng.random_range(-2.0..0.0));
        let c: f64 = rng.random_range(0.5..2.0);
        let x: Vec<f64> = random_direction(rng, n).iter().map(|v| v * r).collect();
        let fam = BarrierFamily::new(n, k, eps, c)?;
        let phi = |p: &[f64]| fam.value(p.iter().map(|v| v * v).sum::<f64>().sqrt());
        let h = 2e-3 * r;
        let hess = fd_hessian(&phi, &x, h);
        let mut fd = hess.eigenvalues()?;
        fd.sort_by(f64::total_cmp);
        let (radial, tangential) = fam.eigen_pair(r);
        let mut want = vec![tangential; n];
        want[0] = radial;
        want.sort_by(f64::total_cmp);
        let scale = want.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let err = fd.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
        eig_worst.offer(err, || json!({ "n": n, "k": k, "x": x, "eps": eps, "c": c, "fd": fd, "formula": want }));

        let unit = BarrierFamily::new(n, k, eps, 1.0)?;
        let phi1 = |p: &[f64]| unit.value(p.iter().map(|v| v * v).sum::<f64>().sqrt());
        let sk = sigma_k_of_matrix(&fd_hessian(&phi1, &x, h), k)?;
        let exact = f_eps(n, k, eps, r)?;
        let rel = (sk - exact).abs() / exact.abs();
        f_worst.offer(rel, || json!({ "n": n, "k": k, "r": r, "eps": eps, "fd": sk, "formula": exact }));
    }
    Ok(vec![
        eig_worst.at_most("D²φ eigenvalues".into(), count, "max rel err", tol.fd),
        f_worst.at_most("f_ε".into(), count, "max rel err", tol.fd),
    ])
}

/// Orthonormal `(τ_1, …, τ_{n−1})` completing `xi` by Gram–Schmidt.
fn tangent_frame(xi: &[f64]) -> Vec<Vec<f64>> {
    let n = xi.len();
    let mut basis: Vec<Vec<f64>> = vec![xi.to_vec()];
    for e in 0..n {
        let mut v: Vec<f64> = (0..n).map(|m| if m == e { 1.0 } else { 0.0 }).collect();
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
                v.iter_mut().zip(b).for_each(|(a, c)| *a -= d * c);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-6 && basis.len() < n {
            basis.push(v.iter().map(|a| a / norm).collect());
        }
    }
    basis.split_off(1)
}

/// A smooth test field `c·exp(b·x) + ½xᵀAx + (d·x)³ + sin(e·x)`.
struct SmoothField {
    c: f64,
    b: Vec<f64>,
    a: Vec<Vec<f64>>,
    d: Vec<f64>,
    e: Vec<f64>,
}

impl SmoothField {
    fn random(rng: &mut ChaCha8Rng, n: usize) -> Self {
        let mut vec = |s: f64| -> Vec<f64> { (0..n).map(|_| s * rng.random_range(-1.0..1.0)).collect() };
        let (b, d, e) = (vec(0.5), vec(0.5), vec(1.0));
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-1.0..1.0);
                a[i][j] = v;
                a[j][i] = v;
            }
        }
        SmoothField {
            c: rng.random_range(-1.0..1.0),
            b,
            a,
            d,
            e,
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let dot = |v: &[f64]| v.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
        let quad: f64 = (0..x.len()).map(|i| x[i] * dot(&self.a[i])).sum();
        self.c * dot(&self.b).exp() + 0.5 * quad + dot(&self.d).powi(3) + dot(&self.e).sin()
    }
}

fn spherical(rng: &mut ChaCha8Rng, count: usize, tol: &Tolerances) -> Result<Vec<CaseReport>> {
    let mut worst = Worst::largest();
    for _ in 0..count {
        let n = rng.random_range(3..=7usize);
        let field = SmoothField::random(rng, n);
        let r: f64 = rng.random_range(0.5..2.0);
        let xi = random_direction(rng, n);
        let taus = tangent_frame(&xi);
        let m = n - 1;
        // F(y, s) = f(s·exp_ξ(y)), exp_ξ the sphere exponential map in the frame τ
        let big_f = |y: &[f64], s: f64| -> f64 {
            let t = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let sinc = if t < 1e-300 { 1.0 } else { t.sin() / t };
            let p: Vec<f64> = (0..n)
                .map(|q| s * (t.cos() * xi[q] + sinc * (0..m).map(|a| y[a] * taus[a][q]).sum::<f64>()))
                .collect();
            field.eval(&p)
        };
        let h = 1e-3;
        let zero = vec![0.0; m];
        let unit = |a: usize, t: f64| -> Vec<f64> { (0..m).map(|q| if q == a { t } else { 0.0 }).collect() };
        let f_a: Vec<f64> = (0..m).map(|a| first_diff(|t| big_f(&unit(a, t), r), h)).collect();
        let at_r = |y: &[f64]| big_f(y, r);
        let f_ab = fd_hessian(&at_r, &zero, h);
        let f_r = first_diff(|t| big_f(&zero, r + t), h);
        let f_rr = second_diff(&|p: &[f64]| big_f(&zero, p[0]), &[r], &[1.0], h);
        let f_ar: Vec<f64> = (0..m)
            .map(|a| first_diff(|t| first_diff(|u| big_f(&unit(a, u), r + t), h), h))
            .collect();
        let sph = spherical_hessian(&SphereDerivs { f_a, f_ab, f_r, f_ar, f_rr }, r)?;
        let x: Vec<f64> = xi.iter().map(|v| v * r).collect();
        let cart = fd_hessian(&|p: &[f64]| field.eval(p), &x, h);
        let mut frame = taus.clone();
        frame.push(xi.clone());
        let rotated = SymMatrix::from_upper(n, |i, j| {
            (0..n)
                .map(|p| (0..n).map(|q| frame[i][p] * cart.get(p, q) * frame[j][q]).sum::<f64>())
                .sum()
        });
        let scale = rotated.max_abs().max(1e-300);
        let err = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (sph.get(i, j) - rotated.get(i, j)).abs())
            .fold(0.0, f64::max)
            / scale;
        worst.offer(err, || json!({ "n": n, "r": r, "xi": xi, "rel_err": err }));
    }
    Ok(vec![worst.at_most("sphere frame".into(), count, "max rel err", tol.fd)])
}

fn subsolution(rng: &mut ChaCha8Rng, count: usize) -> Result<Vec<CaseReport>> {
    let (n, k) = (5, 2);
    let surfaces = [
        ("ball".to_string(), RadialSurface::ball(n, 1.0)?),
        ("1+0.1cos2θ".to_string(), RadialSurface::new(n, vec![1.0, 0.0, 0.1])?),
    ];
    let mut cases = Vec::new();
    for (label, s) in surfaces {
        let params = select_subsolution_n(&s, k)?;
        let mut worst = Worst::smallest();
        for _ in 0..count {
            let theta: f64 = rng.random_range(0.0..PI);
            let g: f64 = rng.random_range(1.0..10.0);
            let r = g * s.rho(theta);
            let v = subsolution_sigma_k(&s, params.big_n, theta, r, k)? * r.powi(k as i32);
            worst.offer(v, || json!({ "theta": theta, "r": r, "big_n": params.big_n, "scaled_sigma": v }));
        }
        cases.push(worst.at_least(
            format!("{label} (N = {})", params.big_n),
            count,
            "min σ_k(D²g^N)·r^k",
            1.0,
        ));
    }
    Ok(cases)
}

/// `u = ½xᵀAx + Σ_d Σ_m w_m (b_m·x)^d` for `d = 3, 4, 5`, with its exact
/// Hessian. The quintic part keeps the truncation error alive when the
/// Newton tensor is linear in `D²u` (`k = 2`).
struct Polynomial {
    a: Vec<Vec<f64>>,
    ridges: Vec<(i32, f64, Vec<f64>)>,
}

impl Polynomial {
    fn random(rng: &mut ChaCha8Rng, n: usize) -> Self {
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-1.0..1.0);
                a[i][j] = v;
                a[j][i] = v;
            }
        }
        let ridges = [3, 3, 4, 4, 5, 5]
            .into_iter()
            .map(|d| (d, rng.random_range(-1.0..1.0), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()))
            .collect();
        Polynomial { a, ridges }
    }

    fn hessian(&self, x: &[f64]) -> SymMatrix {
        let n = x.len();
        let dot = |v: &[f64]| v.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
        SymMatrix::from_upper(n, |i, j| {
            let ridge: f64 = self
                .ridges
                .iter()
                .map(|(d, w, b)| (d * (d - 1)) as f64 * w * dot(b).powi(d - 2) * b[i] * b[j])
                .sum();
            self.a[i][j] + ridge
        })
    }
}

/// Central-difference divergence `Σ_j ∂_j T^{ij}` of the Newton tensor.
fn fd_divergence(p: &Polynomial, x: &[f64], k: usize, h: f64) -> Result<Vec<f64>> {
    let n = x.len();
    let mut div = vec![0.0; n];
    for j in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let tp = newton_tensor(&p.hessian(&xp), k)?;
        let tm = newton_tensor(&p.hessian(&xm), k)?;
        for (i, d) in div.iter_mut().enumerate() {
            *d += (tp.get(i, j) - tm.get(i, j)) / (2.0 * h);
        }
    }
    Ok(div)
}

fn newton_divergence(rng: &mut ChaCha8Rng, count: usize, tol: &Tolerances) -> Result<Vec<CaseReport>> {
    let h = 0.05;
    let mut worst = Worst::largest();
    for _ in 0..count {
        let (n, k) = [(5, 2), (6, 3), (4, 2), (7, 2)][rng.random_range(0..4)];
        let poly = Polynomial::random(rng, n);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = |v: Vec<f64>| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let coarse = norm(fd_divergence(&poly, &x, k, h)?);
        let fine = norm(fd_divergence(&poly, &x, k, h / 2.0)?);
        let ratio = coarse / fine;
        let dev = (ratio / 4.0 - 1.0).abs();
        worst.offer(dev, || json!({ "n": n, "k": k, "x": x, "h": h, "coarse": coarse, "fine": fine, "ratio": ratio }));
    }
    Ok(vec![worst.at_most("ratio under h → h/2".into(), count, "max |ratio/4 − 1|", tol.divergence)])
}

fn log_solution(rng: &mut ChaCha8Rng, count: usize, tol: &Tolerances) -> Result<Vec<CaseReport>> {
    let mut cases = Vec::new();
    for n in [4usize, 6] {
        let mut worst = Worst::largest();
        for _ in 0..count {
            let c: f64 = rng.random_range(0.1..10.0);
            let r: f64 = rng.random_range(0.5..10.0);
            let s = log_solution_check(n, c, r)?;
            let scaled = s.abs() / (c / (r * r)).powi(n as i32 / 2);
            worst.offer(scaled, || json!({ "n": n, "c": c, "r": r, "sigma": s }));
        }
        cases.push(worst.at_most(format!("n={n}"), count, "max |S_{n/2}|/(C/r²)^{n/2}", tol.log));
        let mut rejected = Worst::largest();
        let flagged = matches!(check_dimensions(n, n / 2), Err(Error::Rejected(ref m)) if m.contains("log"));
        rejected.offer(if flagged { 0.0 } else { 1.0 }, || json!({ "n": n, "k": n / 2 }));
        cases.push(rejected.at_most(format!("k = n/2 rejected, n={n}"), 1, "0 when rejected", 0.0));
    }
    Ok(cases)
}

fn euler(rng: &mut ChaCha8Rng, count: usize, tol: &Tolerances) -> Result<Vec<CaseReport>> {
    let mut worst = Worst::largest();
    for _ in 0..count {
        let n = rng.random_range(2..=8usize);
        let k = rng.random_range(1..=n);
        let a = SymMatrix::from_upper(n, |_, _| rng.random_range(-1.0..1.0));
        let t = newton_tensor(&a, k)?;
        let eig = a.eigenvalues()?;
        let sk = elem_sym_all(&eig, k)[k];
        let lhs = t.frobenius_dot(&a);
        let scale = a.max_abs().max(1.0).powi(k as i32) * (n as f64).powi(k as i32);
        let err = (lhs - k as f64 * sk).abs() / scale;
        worst.offer(err, || json!({ "n": n, "k": k, "lhs": lhs, "k_sk": k as f64 * sk }));
    }
    Ok(vec![worst.at_most("tr(T_k A) = k S_k".into(), count, "max scaled err", tol.euler)])
}
