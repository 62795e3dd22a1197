//! Damped Newton for `S_k(D²u) = f_ε` on the boundary-fitted axisymmetric grid.

use super::field::SolutionField;
use super::grid::AnnulusGrid;
use super::newton::{damped_newton, Eval, NewtonOptions, NewtonSystem};
use super::report::{field_columns, fit_asymptotics, GradientBand, SolveReport, SANDWICH_SLACK};
use super::sigma_scale;
use crate::barriers::ApproxProblem;
use crate::error::{Error, Result};
use crate::geometry::AxisymHessian;

/// Starting iterate for [`solve_axisym`].
#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// Per-ray blend of the boundary data shaped by the barrier profile
    /// `(r+ε)^{−α₀}`.
    BarrierBlend,
    /// The same blend with the flatter profile `(r+ε)^{−α₀/2}`; lies below
    /// [`InitialGuess::BarrierBlend`] and still matches both boundary values.
    LowerBlend,
    /// A previous field, resampled onto the new grid.
    Field(Box<SolutionField>),
}

struct AxisymSystem<'a> {
    problem: &'a ApproxProblem,
    grid: &'a AnnulusGrid,
    free: Vec<usize>,
}

impl AxisymSystem<'_> {
    fn node(&self, u: &[f64], i: usize, j: usize) -> Result<(AxisymHessian, f64)> {
        let g = self.grid;
        let p = g.to_physical(i, j, g.comp_derivs(u, i, j));
        let d = crate::geometry::AxisymDerivs {
            u_r: p[0],
            u_theta: p[1],
            u_rr: p[2],
            u_rtheta: p[3],
            u_thetatheta: p[4],
        };
        let r = g.r(i, j);
        Ok((AxisymHessian::new(&d, r, g.theta[j], g.n)?, r))
    }

    fn margin(&self, h: &AxisymHessian, r: f64) -> f64 {
        (1..=self.problem.k)
            .map(|m| h.sigma_k(m) / sigma_scale(self.problem.n, self.problem.k, m, r))
            .fold(f64::INFINITY, f64::min)
    }
}

impl NewtonSystem for AxisymSystem<'_> {
    fn free(&self) -> &[usize] {
        &self.free
    }

    fn eval(&self, u: &[f64]) -> Result<Eval> {
        let (n, k) = (self.problem.n, self.problem.k);
        let g = self.grid;
        let mut res = Vec::with_capacity(self.free.len());
        let mut margin = f64::INFINITY;
        for &node in &self.free {
            let (i, j) = (node / g.ntheta, node % g.ntheta);
            let (h, r) = self.node(u, i, j)?;
            let v = (h.sigma_k(k) - self.problem.f(r)) / sigma_scale(n, k, k, r);
            if !v.is_finite() {
                return Err(Error::Domain("non-finite residual".into()));
            }
            res.push(v);
            margin = margin.min(self.margin(&h, r));
        }
        Ok(Eval { res, margin })
    }

    fn jacobian(&self, u: &[f64]) -> Result<Vec<(usize, usize, f64)>> {
        let (n, k) = (self.problem.n, self.problem.k);
        let g = self.grid;
        let nth = g.ntheta;
        let mut out = Vec::with_capacity(self.free.len() * 30);
        let mut acc: Vec<(usize, f64)> = Vec::with_capacity(40);
        for (row, &node) in self.free.iter().enumerate() {
            let (i, j) = (node / nth, node % nth);
            let (h, r) = self.node(u, i, j)?;
            let scale = 1.0 / sigma_scale(n, k, k, r);
            let pk = h.sigma_k_partials(k);
            let theta = g.theta[j];
            let (r2, sn) = (r * r, theta.sin());
            // d(rr, rt, tt, az) / d(u_r, u_θ, u_rr, u_rθ, u_θθ)
            let tt_row = [1.0 / r, 0.0, 0.0, 0.0, 1.0 / r2];
            let az_row = if sn < 1e-12 {
                tt_row
            } else {
                [1.0 / r, theta.cos() / sn / r2, 0.0, 0.0, 0.0]
            };
            let dmap = [
                [0.0, 0.0, 1.0, 0.0, 0.0],
                [0.0, -1.0 / r2, 0.0, 1.0 / r, 0.0],
                tt_row,
                az_row,
            ];
            let mut gphys = [0.0; 5];
            for (hrow, &ph) in dmap.iter().zip(&pk) {
                for q in 0..5 {
                    gphys[q] += ph * hrow[q];
                }
            }
            let chain = g.chain_matrix(i, j);
            let mut gc = [0.0; 5];
            for q in 0..5 {
                for c in 0..5 {
                    gc[c] += gphys[q] * chain[q][c];
                }
            }
            for v in gc.iter_mut() {
                *v *= scale;
            }
            acc.clear();
            let mut push = |ii: usize, jj: usize, v: f64| {
                if ii == 0 || ii == g.ns - 1 {
                    return;
                }
                let col = (ii - 1) * nth + jj;
                match acc.iter_mut().find(|e| e.0 == col) {
                    Some(e) => e.1 += v,
                    None => acc.push((col, v)),
                }
            };
            for (&ii, &w) in g.ds1[i].idx.iter().zip(&g.ds1[i].w) {
                push(ii, j, gc[0] * w);
                for (&jj, &w2) in g.dt1[j].idx.iter().zip(&g.dt1[j].w) {
                    push(ii, jj, gc[3] * w * w2);
                }
            }
            for (&jj, &w) in g.dt1[j].idx.iter().zip(&g.dt1[j].w) {
                push(i, jj, gc[1] * w);
            }
            for (&ii, &w) in g.ds2[i].idx.iter().zip(&g.ds2[i].w) {
                push(ii, j, gc[2] * w);
            }
            for (&jj, &w) in g.dt2[j].idx.iter().zip(&g.dt2[j].w) {
                push(i, jj, gc[4] * w);
            }
            out.extend(acc.iter().map(|&(c, v)| (row, c, v)));
        }
        Ok(out)
    }
}

fn initial_field(problem: &ApproxProblem, grid: &AnnulusGrid, guess: &InitialGuess) -> Result<SolutionField> {
    let a0 = problem.alpha0();
    let eps = problem.eps;
    let big_r = problem.r_outer;
    let blend = |p: f64| {
        move |r: f64, theta: f64| {
            let prof = |x: f64| -(x + eps).powf(-p);
            let rho = problem.surface.rho(theta);
            let w = (prof(r) - prof(rho)) / (prof(big_r) - prof(rho));
            (1.0 - w) * -1.0 + w * problem.b_r
        }
    };
    let mut field = match guess {
        InitialGuess::BarrierBlend => SolutionField::from_fn(grid.clone(), problem.b_r, blend(a0)),
        InitialGuess::LowerBlend => SolutionField::from_fn(grid.clone(), problem.b_r, blend(0.5 * a0)),
        InitialGuess::Field(prev) => prev.resample(grid, problem.b_r)?,
    };
    field.outer_value = problem.b_r;
    field.impose_dirichlet();
    Ok(field)
}

/// Damped Newton solve on `grid`. On failure from the default start the
/// solve is retried once from [`InitialGuess::LowerBlend`].
pub fn solve_axisym(
    problem: &ApproxProblem,
    grid: &AnnulusGrid,
    guess: &InitialGuess,
    opts: &NewtonOptions,
) -> Result<(SolutionField, SolveReport)> {
    if grid.surface != problem.surface || grid.k != problem.k {
        return Err(Error::Precondition("grid and problem describe different domains".into()));
    }
    if (grid.r_outer - problem.r_outer).abs() > 1e-12 * problem.r_outer || grid.eps != problem.eps {
        return Err(Error::Precondition("grid and problem disagree on R or ε".into()));
    }
    let sys = AxisymSystem {
        problem,
        grid,
        free: (grid.ntheta..grid.len() - grid.ntheta).collect(),
    };
    let start = initial_field(problem, grid, guess)?;
    let out = match damped_newton(&sys, start.u.clone(), opts) {
        Ok(o) => o,
        Err(first) if matches!(guess, InitialGuess::BarrierBlend) => {
            let retry = initial_field(problem, grid, &InitialGuess::LowerBlend)?;
            damped_newton(&sys, retry.u, opts).map_err(|_| first)?
        }
        Err(e) => return Err(e),
    };
    let field = SolutionField {
        grid: grid.clone(),
        u: out.u,
        outer_value: problem.b_r,
    };
    let report = axisym_report(problem, &field, out.history, out.iterations, out.margin)?;
    Ok((field, report))
}

/// Scaled max residual and worst cone margin of a field for `problem`.
pub fn field_residual(problem: &ApproxProblem, field: &SolutionField) -> Result<(f64, f64)> {
    let sys = AxisymSystem {
        problem,
        grid: &field.grid,
        free: (field.grid.ntheta..field.grid.len() - field.grid.ntheta).collect(),
    };
    let e = sys.eval(&field.u)?;
    Ok((e.max_abs(), e.margin))
}

pub(crate) fn axisym_report(
    problem: &ApproxProblem,
    field: &SolutionField,
    history: Vec<f64>,
    iterations: usize,
    margin: f64,
) -> Result<SolveReport> {
    let g = &field.grid;
    let mut sandwich = f64::INFINITY;
    for i in 0..g.ns {
        for j in 0..g.ntheta {
            let (lo, hi) = problem.sandwich_at(g.r(i, j), g.theta[j])?;
            let u = field.at(i, j);
            sandwich = sandwich.min((u - lo).min(hi - u));
        }
    }
    let band = GradientBand::new(problem, (0..g.ntheta).map(|j| field.grad_norm(g.ns - 1, j)));
    let inner = (0..g.ntheta).map(|j| field.grad_norm(0, j)).fold(0.0, f64::max);
    let asymptotics = fit_asymptotics(&field_columns(field)?, g.n, g.k, g.r_outer)?;
    let final_residual = *history.last().unwrap_or(&f64::NAN);
    Ok(SolveReport {
        n: problem.n,
        k: problem.k,
        r_outer: problem.r_outer,
        eps: problem.eps,
        c0: problem.c0,
        c1: problem.c1,
        delta: problem.delta,
        grid: [g.ns, g.ntheta],
        residual_history: history,
        final_residual,
        iterations,
        admissibility_margin: margin,
        sandwich_margin: sandwich,
        sandwich_ok: sandwich >= -SANDWICH_SLACK,
        gradient_band: band,
        inner_gradient_max: inner,
        asymptotics,
    })
}
