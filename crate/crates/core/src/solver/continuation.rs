//! Continuation in `(ε, R)`: each stage is warm-started from the previous field.

use serde::Serialize;

use super::axisym::{solve_axisym, InitialGuess};
use super::config::SolverConfig;
use super::field::SolutionField;
use super::grid::AnnulusGrid;
use super::report::SolveReport;
use crate::barriers::{ApproxOptions, ApproxProblem};
use crate::error::{Error, Result};
use crate::geometry::RadialSurface;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageSummary {
    pub stage: usize,
    pub eps: f64,
    pub r_outer: f64,
    pub final_residual: f64,
    pub iterations: usize,
    pub gamma_median: f64,
    pub gamma_affine: f64,
}

/// Linear extrapolation of `γ` to `ε = 0` over stages sharing the final `R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Richardson {
    pub gamma_extrapolated: f64,
    /// Ratio of the last two `dγ/dε` slopes; near 1 when the trend is linear.
    pub slope_ratio: Option<f64>,
    pub linear: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationResult {
    pub field: SolutionField,
    pub problem: ApproxProblem,
    pub report: SolveReport,
    pub stages: Vec<StageSummary>,
    pub richardson: Option<Richardson>,
}

/// Expands the two schedules to a common length (a length-1 schedule is
/// repeated) and checks monotonicity.
pub fn stage_schedule(eps: &[f64], radii: &[f64]) -> Result<Vec<(f64, Option<f64>)>> {
    if eps.is_empty() {
        return Err(Error::Domain("ε schedule is empty".into()));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("ε schedule must be strictly decreasing".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("R schedule must be strictly increasing".into()));
    }
    let len = eps.len().max(radii.len());
    let fits = |l: usize| l == len || l <= 1;
    if !fits(eps.len()) || !fits(radii.len()) {
        return Err(Error::Domain(format!(
            "schedules of lengths {} and {} cannot be paired",
            eps.len(),
            radii.len()
        )));
    }
    Ok((0..len)
        .map(|s| {
            let e = if eps.len() == 1 { eps[0] } else { eps[s] };
            let r = match radii.len() {
                0 => None,
                1 => Some(radii[0]),
                _ => Some(radii[s]),
            };
            (e, r)
        })
        .collect())
}

/// `ε_R = c₀ R^{−k(α₀+3)}` for each radius: the `ε` that tracks `R` in the
/// gradient-height barrier argument. `c₀` is left to the caller.
pub fn coupled_eps_schedule(n: usize, k: usize, radii: &[f64], c0: f64) -> Vec<f64> {
    let a0 = crate::barriers::alpha0(n, k);
    radii.iter().map(|r| c0 * r.powf(-(k as f64) * (a0 + 3.0))).collect()
}

/// Runs every stage; any failure aborts with the stage index.
pub fn continuation_solve(surface: &RadialSurface, k: usize, cfg: &SolverConfig) -> Result<ContinuationResult> {
    let schedule = stage_schedule(&cfg.eps_schedule, &cfg.r_schedule)?;
    let opts = cfg.newton();
    let mut prev: Option<(SolutionField, ApproxProblem, SolveReport)> = None;
    let mut stages = Vec::new();
    for (stage, &(eps, r_outer)) in schedule.iter().enumerate() {
        let run = || -> Result<(SolutionField, ApproxProblem, SolveReport)> {
            let problem = ApproxProblem::new(
                surface.clone(),
                k,
                ApproxOptions {
                    r_outer,
                    eps,
                    ..Default::default()
                },
            )?;
            let grid = AnnulusGrid::new(surface, k, problem.r_outer, eps, cfg.ns, cfg.ntheta, cfg.grading)?;
            let guess = match &prev {
                Some((f, _, _)) => InitialGuess::Field(Box::new(f.clone())),
                None => InitialGuess::BarrierBlend,
            };
            let (field, report) = solve_axisym(&problem, &grid, &guess, &opts)?;
            Ok((field, problem, report))
        };
        let (field, problem, report) = run().map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })?;
        stages.push(StageSummary {
            stage,
            eps,
            r_outer: problem.r_outer,
            final_residual: report.final_residual,
            iterations: report.iterations,
            gamma_median: report.asymptotics.gamma.median,
            gamma_affine: report.asymptotics.gamma.affine,
        });
        prev = Some((field, problem, report));
    }
    let (field, problem, report) = prev.expect("non-empty schedule");
    let richardson = richardson(&stages);
    Ok(ContinuationResult {
        field,
        problem,
        report,
        stages,
        richardson,
    })
}

fn richardson(stages: &[StageSummary]) -> Option<Richardson> {
    let last_r = stages.last()?.r_outer;
    let same: Vec<&StageSummary> = stages.iter().filter(|s| s.r_outer == last_r).collect();
    if same.len() < 2 {
        return None;
    }
    let m = same.len();
    let (a, b) = (same[m - 2], same[m - 1]);
    let slope = (a.gamma_affine - b.gamma_affine) / (a.eps - b.eps);
    let slope_ratio = (m >= 3).then(|| {
        let c = same[m - 3];
        let prev = (c.gamma_affine - a.gamma_affine) / (c.eps - a.eps);
        slope / prev
    });
    Some(Richardson {
        gamma_extrapolated: b.gamma_affine - slope * b.eps,
        slope_ratio,
        linear: slope_ratio.is_some_and(|q| (0.5..=2.0).contains(&q)),
    })
}
