//! Damped Newton iteration with an admissibility guard.

use super::stencil::sparse_solve;
use crate::error::{Error, Result};

/// Options shared by the radial and axisymmetric solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Convergence threshold on the scaled max residual.
    pub tol_res: f64,
    pub max_newton: usize,
    /// Maximum number of step halvings per iteration.
    pub max_halvings: usize,
    /// Scaled cone margin below which a node counts as inadmissible.
    pub adm_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol_res: 1e-8,
            max_newton: 50,
            max_halvings: 40,
            adm_tol: 1e-8,
        }
    }
}

/// Scaled residual at the free nodes and the worst cone margin.
pub(crate) struct Eval {
    pub res: Vec<f64>,
    pub margin: f64,
}

impl Eval {
    pub fn max_abs(&self) -> f64 {
        self.res.iter().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    fn l2(&self) -> f64 {
        self.res.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub(crate) trait NewtonSystem {
    /// Indices into the full nodal vector that are unknowns.
    fn free(&self) -> &[usize];
    fn eval(&self, u: &[f64]) -> Result<Eval>;
    /// Jacobian of `eval().res` with respect to the free values, as
    /// `(row, col, value)` in free-index space.
    fn jacobian(&self, u: &[f64]) -> Result<Vec<(usize, usize, f64)>>;
}

pub(crate) struct NewtonOutcome {
    pub u: Vec<f64>,
    pub history: Vec<f64>,
    pub iterations: usize,
    pub margin: f64,
}

pub(crate) fn damped_newton(sys: &impl NewtonSystem, mut u: Vec<f64>, opts: &NewtonOptions) -> Result<NewtonOutcome> {
    let free = sys.free().to_vec();
    let mut cur = sys.eval(&u)?;
    let mut history = vec![cur.max_abs()];
    for it in 0..=opts.max_newton {
        if cur.max_abs() <= opts.tol_res && cur.margin >= -opts.adm_tol {
            return Ok(NewtonOutcome {
                u,
                history,
                iterations: it,
                margin: cur.margin,
            });
        }
        if it == opts.max_newton {
            break;
        }
        let jac = sys.jacobian(&u)?;
        let rhs: Vec<f64> = cur.res.iter().map(|v| -v).collect();
        let delta = sparse_solve(free.len(), &jac, &rhs)?;
        let base_l2 = cur.l2();
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let mut trial = u.clone();
            for (&node, d) in free.iter().zip(&delta) {
                trial[node] += step * d;
            }
            if let Ok(e) = sys.eval(&trial) {
                let admissible = e.margin >= -opts.adm_tol || e.margin >= cur.margin;
                if admissible && e.l2() <= (1.0 - 1e-4 * step) * base_l2 {
                    accepted = Some((trial, e));
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((trial, e)) => {
                u = trial;
                cur = e;
                history.push(cur.max_abs());
            }
            None => {
                return Err(Error::NonConvergence {
                    iterations: it,
                    residual: cur.max_abs(),
                    detail: format!(
                        "step halving exhausted after {} tries (admissibility guard or no residual decrease); \
                         worst cone margin {:.3e}",
                        opts.max_halvings, cur.margin
                    ),
                    history,
                });
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_newton,
        residual: cur.max_abs(),
        detail: "iteration limit reached".into(),
        history,
    })
}
