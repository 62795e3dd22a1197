//! The radial two-point problem for `Ω = B_{ρ₀}`:
//! `C(n−1,k−1)(u'/r)^{k−1}u'' + C(n−1,k)(u'/r)^k = f_ε`,
//! discretized uniformly in `t = log r`.

use super::newton::{damped_newton, Eval, NewtonOptions, NewtonSystem};
use super::report::{fit_asymptotics, Column, GradientBand, SolveReport, SANDWICH_SLACK};
use super::stencil::{open_stencils, Stencil};
use super::{binom, sigma_scale};
use crate::barriers::{ApproxOptions, ApproxProblem};
use crate::error::{Error, Result};
use crate::geometry::RadialSurface;

/// Nodal radial solution.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    pub problem: ApproxProblem,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub d2u: Vec<f64>,
}

impl RadialSolution {
    pub fn rho0(&self) -> f64 {
        self.r[0]
    }

    /// Cubic interpolation in `log r`.
    pub fn value_at(&self, r: f64) -> f64 {
        let t = r.ln();
        let ts: Vec<f64> = self.r.iter().map(|x| x.ln()).collect();
        let m = ts.len();
        let pos = ts.partition_point(|&x| x < t);
        let base = pos.saturating_sub(2).min(m - 4);
        (base..base + 4)
            .map(|a| {
                let w: f64 = (base..base + 4)
                    .filter(|&b| b != a)
                    .map(|b| (t - ts[b]) / (ts[a] - ts[b]))
                    .product();
                w * self.u[a]
            })
            .sum()
    }
}

struct RadialSystem<'a> {
    n: usize,
    k: usize,
    eps: f64,
    t: Vec<f64>,
    d1: Vec<Stencil>,
    d2: Vec<Stencil>,
    free: Vec<usize>,
    problem: &'a ApproxProblem,
}

impl RadialSystem<'_> {
    /// `(u', u'')` at node `i`.
    fn derivs(&self, u: &[f64], i: usize) -> (f64, f64) {
        let r = self.t[i].exp();
        let ut = self.d1[i].apply(|j| u[j]);
        let utt = self.d2[i].apply(|j| u[j]);
        (ut / r, (utt - ut) / (r * r))
    }

    /// `S_m` of `(u'', u'/r, …)`.
    fn sm(&self, m: usize, up: f64, upp: f64, r: f64) -> f64 {
        let q = up / r;
        binom(self.n - 1, m - 1) * q.powi(m as i32 - 1) * upp + binom(self.n - 1, m) * q.powi(m as i32)
    }

    fn node_residual(&self, u: &[f64], i: usize) -> (f64, f64) {
        let r = self.t[i].exp();
        let (up, upp) = self.derivs(u, i);
        let res = (self.sm(self.k, up, upp, r) - self.problem.f(r)) / sigma_scale(self.n, self.k, self.k, r);
        let margin = (1..=self.k)
            .map(|m| self.sm(m, up, upp, r) / sigma_scale(self.n, self.k, m, r))
            .fold(f64::INFINITY, f64::min);
        (res, margin)
    }
}

impl NewtonSystem for RadialSystem<'_> {
    fn free(&self) -> &[usize] {
        &self.free
    }

    fn eval(&self, u: &[f64]) -> Result<Eval> {
        let mut res = Vec::with_capacity(self.free.len());
        let mut margin = f64::INFINITY;
        for &i in &self.free {
            let (r, m) = self.node_residual(u, i);
            if !r.is_finite() {
                return Err(Error::Domain("non-finite residual".into()));
            }
            res.push(r);
            margin = margin.min(m);
        }
        Ok(Eval { res, margin })
    }

    fn jacobian(&self, u: &[f64]) -> Result<Vec<(usize, usize, f64)>> {
        let (n, k) = (self.n, self.k);
        let last = self.t.len() - 1;
        let mut out = Vec::new();
        for (row, &i) in self.free.iter().enumerate() {
            let r = self.t[i].exp();
            let (up, upp) = self.derivs(u, i);
            let q = up / r;
            let d_upp = binom(n - 1, k - 1) * q.powi(k as i32 - 1);
            let mut d_q = binom(n - 1, k) * k as f64 * q.powi(k as i32 - 1);
            if k >= 2 {
                d_q += binom(n - 1, k - 1) * (k - 1) as f64 * q.powi(k as i32 - 2) * upp;
            }
            let scale = 1.0 / sigma_scale(n, k, k, r);
            let r2 = r * r;
            let d_ut = (d_q - d_upp) / r2 * scale;
            let d_utt = d_upp / r2 * scale;
            let mut acc: Vec<(usize, f64)> = Vec::new();
            let mut push = |col: usize, v: f64| {
                if col == 0 || col == last {
                    return;
                }
                match acc.iter_mut().find(|e| e.0 == col) {
                    Some(e) => e.1 += v,
                    None => acc.push((col, v)),
                }
            };
            for (&j, &w) in self.d1[i].idx.iter().zip(&self.d1[i].w) {
                push(j, d_ut * w);
            }
            for (&j, &w) in self.d2[i].idx.iter().zip(&self.d2[i].w) {
                push(j, d_utt * w);
            }
            out.extend(acc.into_iter().map(|(c, v)| (row, c - 1, v)));
        }
        Ok(out)
    }
}

/// Builds the ball problem with the default barrier selection.
pub fn ball_problem(n: usize, k: usize, rho0: f64, r_outer: f64, eps: f64) -> Result<ApproxProblem> {
    ApproxProblem::new(
        RadialSurface::ball(n, rho0)?,
        k,
        ApproxOptions {
            r_outer: Some(r_outer),
            eps,
            ..Default::default()
        },
    )
}

/// Solves the radial problem for `Ω = B_{ρ₀}` on `nodes` points.
pub fn solve_radial(
    n: usize,
    k: usize,
    rho0: f64,
    r_outer: f64,
    eps: f64,
    nodes: usize,
) -> Result<(RadialSolution, SolveReport)> {
    let problem = ball_problem(n, k, rho0, r_outer, eps)?;
    solve_radial_problem(&problem, nodes, None, &NewtonOptions::default())
}

/// Radial solve for a ball [`ApproxProblem`], optionally warm-started.
pub fn solve_radial_problem(
    problem: &ApproxProblem,
    nodes: usize,
    warm: Option<&RadialSolution>,
    opts: &NewtonOptions,
) -> Result<(RadialSolution, SolveReport)> {
    if !problem.surface.is_ball() {
        return Err(Error::Precondition("radial solver needs a ball domain".into()));
    }
    if nodes < 256 {
        return Err(Error::Domain(format!("radial grid needs at least 256 nodes, got {nodes}")));
    }
    let (n, k) = (problem.n, problem.k);
    let rho0 = problem.surface.rho(0.0);
    let big_r = problem.r_outer;
    let a0 = problem.alpha0();
    let (t0, t1) = (rho0.ln(), big_r.ln());
    let t: Vec<f64> = (0..nodes).map(|i| t0 + (t1 - t0) * i as f64 / (nodes - 1) as f64).collect();
    let r: Vec<f64> = t.iter().map(|x| x.exp()).collect();

    // One-parameter family a − b(r+ε)^{−α₀} through both boundary values.
    let eps = problem.eps;
    let p = |x: f64| (x + eps).powf(-a0);
    let b = (problem.b_r + 1.0) / (p(rho0) - p(big_r));
    let a = -1.0 + b * p(rho0);
    let family = |x: f64| a - b * p(x);

    if eps == 0.0 {
        let u: Vec<f64> = r.iter().map(|&x| family(x)).collect();
        let du: Vec<f64> = r.iter().map(|&x| b * a0 * x.powf(-a0 - 1.0)).collect();
        let d2u: Vec<f64> = r.iter().map(|&x| -b * a0 * (a0 + 1.0) * x.powf(-a0 - 2.0)).collect();
        let mut u = u;
        u[0] = -1.0;
        u[nodes - 1] = problem.b_r;
        let sol = RadialSolution {
            problem: problem.clone(),
            r,
            u,
            du,
            d2u,
        };
        let residual = (1..nodes - 1)
            .map(|i| {
                let x = sol.r[i];
                let q = sol.du[i] / x;
                let s = binom(n - 1, k - 1) * q.powi(k as i32 - 1) * sol.d2u[i] + binom(n - 1, k) * q.powi(k as i32);
                (s / sigma_scale(n, k, k, x)).abs()
            })
            .fold(0.0, f64::max);
        let report = radial_report(&sol, vec![residual], 0)?;
        return Ok((sol, report));
    }

    let (d1, d2) = open_stencils(&t);
    let sys = RadialSystem {
        n,
        k,
        eps,
        t: t.clone(),
        d1,
        d2,
        free: (1..nodes - 1).collect(),
        problem,
    };
    let mut u0: Vec<f64> = match warm {
        Some(w) => r.iter().map(|&x| w.value_at(x.min(w.problem.r_outer))).collect(),
        None => r.iter().map(|&x| family(x)).collect(),
    };
    u0[0] = -1.0;
    u0[nodes - 1] = problem.b_r;
    let out = damped_newton(&sys, u0, opts)?;
    let u = out.u;
    let mut du = Vec::with_capacity(nodes);
    let mut d2u = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let (a, b) = sys.derivs(&u, i);
        du.push(a);
        d2u.push(b);
    }
    debug_assert!(sys.eps == eps);
    let sol = RadialSolution {
        problem: problem.clone(),
        r,
        u,
        du,
        d2u,
    };
    let report = radial_report(&sol, out.history, out.iterations)?;
    Ok((sol, report))
}

fn radial_report(sol: &RadialSolution, history: Vec<f64>, iterations: usize) -> Result<SolveReport> {
    let p = &sol.problem;
    let (n, k) = (p.n, p.k);
    let m = sol.r.len();
    let mut sandwich = f64::INFINITY;
    for (&r, &u) in sol.r.iter().zip(&sol.u) {
        let (lo, hi) = p.sandwich_at(r, 0.0)?;
        sandwich = sandwich.min((u - lo).min(hi - u));
    }
    let mut margin = f64::INFINITY;
    for i in 1..m - 1 {
        let (r, q) = (sol.r[i], sol.du[i] / sol.r[i]);
        for mm in 1..=k {
            let s = binom(n - 1, mm - 1) * q.powi(mm as i32 - 1) * sol.d2u[i] + binom(n - 1, mm) * q.powi(mm as i32);
            margin = margin.min(s / sigma_scale(n, k, mm, r));
        }
    }
    let column = Column {
        r: sol.r.clone(),
        u: sol.u.clone(),
        grad: sol.du.iter().map(|v| v.abs()).collect(),
        hess: sol
            .r
            .iter()
            .zip(sol.du.iter().zip(&sol.d2u))
            .map(|(r, (d, dd))| dd.abs().max((d / r).abs()))
            .collect(),
    };
    let asymptotics = fit_asymptotics(&[column], n, k, p.r_outer)?;
    let final_residual = *history.last().unwrap_or(&0.0);
    Ok(SolveReport {
        n,
        k,
        r_outer: p.r_outer,
        eps: p.eps,
        c0: p.c0,
        c1: p.c1,
        delta: p.delta,
        grid: [m, 1],
        residual_history: history,
        final_residual,
        iterations,
        admissibility_margin: margin,
        sandwich_margin: sandwich,
        sandwich_ok: sandwich >= -SANDWICH_SLACK,
        gradient_band: GradientBand::new(p, std::iter::once(sol.du[m - 1].abs())),
        inner_gradient_max: sol.du[0].abs(),
        asymptotics,
    })
}

/// Runs the radial solve through a decreasing `ε` schedule, warm-starting
/// each stage. Returns the final solution and every stage report.
pub fn continuation_radial(
    n: usize,
    k: usize,
    rho0: f64,
    r_outer: f64,
    eps_schedule: &[f64],
    nodes: usize,
) -> Result<(RadialSolution, Vec<SolveReport>)> {
    if eps_schedule.is_empty() {
        return Err(Error::Domain("empty ε schedule".into()));
    }
    if eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("ε schedule must be strictly decreasing".into()));
    }
    let mut prev: Option<RadialSolution> = None;
    let mut reports = Vec::new();
    for (stage, &eps) in eps_schedule.iter().enumerate() {
        let step = ball_problem(n, k, rho0, r_outer, eps)
            .and_then(|p| solve_radial_problem(&p, nodes, prev.as_ref(), &NewtonOptions::default()));
        let (sol, rep) = step.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })?;
        reports.push(rep);
        prev = Some(sol);
    }
    Ok((prev.expect("non-empty schedule"), reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_branch() {
        let (sol, rep) = solve_radial(5, 2, 1.0, 100.0, 0.0, 512).unwrap();
        assert_eq!(sol.u[0], -1.0);
        assert!(rep.final_residual < 1e-10);
        let err = sol
            .r
            .iter()
            .zip(&sol.u)
            .map(|(r, u)| (u + r.powf(-0.5)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn newton_branch_matches_closed_form() {
        let (sol, rep) = solve_radial(5, 2, 1.0, 100.0, 1e-6, 1024).unwrap();
        assert!(rep.final_residual <= 1e-8);
        assert!(rep.sandwich_ok, "{}", rep.sandwich_margin);
        assert!(rep.gradient_band.ok);
        let err = sol
            .r
            .iter()
            .zip(&sol.u)
            .map(|(r, u)| (u + r.powf(-0.5)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
        assert!((rep.asymptotics.gamma.median - 1.0).abs() < 0.01);
    }

    #[test]
    fn ball_of_radius_two() {
        let (_, rep) = solve_radial(5, 2, 2.0, 4000.0, 1e-6, 2048).unwrap();
        let g = rep.asymptotics.gamma.affine;
        assert!((g - 2f64.sqrt()).abs() < 0.01 * 2f64.sqrt(), "{g}");
    }

    #[test]
    fn smaller_eps_gives_larger_solution() {
        let (a, _) = solve_radial(5, 2, 1.0, 50.0, 1e-4, 512).unwrap();
        let (b, _) = solve_radial(5, 2, 1.0, 50.0, 1e-5, 512).unwrap();
        for (ua, ub) in a.u.iter().zip(&b.u) {
            assert!(*ub >= ua - 1e-6);
        }
    }
}
