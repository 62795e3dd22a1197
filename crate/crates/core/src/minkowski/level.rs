//! Level sets `{u = s}` of a solved field: marching-squares contour plus
//! Gauss–Legendre quadrature nodes on the ray parametrization `r = r_s(θ)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::interp::{to_axisym, FieldInterpolant};
use super::sphere_area;
use crate::error::{Error, Result};
use crate::geometry::AxisymHessian;
use crate::solver::SolutionField;
use crate::symfun::{elem_sym_all, newton_tensor, SymMatrix};

/// A level is regular when `min |∇u|` on it is at least this fraction of `max |∇u|` on it.
pub const REGULAR_FRACTION: f64 = 1e-3;
pub const DEFAULT_NODES: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelPoint {
    pub theta: f64,
    pub r: f64,
    pub grad_norm: f64,
    /// Unit normal `∇u/|∇u|` in the `(e_r, e_θ)` basis.
    pub normal: [f64; 2],
    /// `S_k^{ij} u_i u_j` from the Newton tensor of the interpolated Hessian.
    pub newton_form: f64,
    /// `σ_{k−1}` of the level-set principal curvatures, from the contour shape alone.
    pub sigma_km1: f64,
    /// `ω_{n−2} (r sin θ)^{n−2}`.
    pub rot_weight: f64,
    /// `dℓ/dθ` from the interpolated gradient.
    pub dl: f64,
    /// `dℓ/dθ` from the cosine fit of the contour.
    pub dl_fit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSet {
    pub level: f64,
    pub n: usize,
    pub k: usize,
    /// Marching-squares polyline `(r, θ)` from `θ = 0` to `θ = π`.
    pub polyline: Vec<(f64, f64)>,
    pub points: Vec<LevelPoint>,
    /// Gauss–Legendre weights on `[0, π]`, aligned with `points`.
    pub weights: Vec<f64>,
    pub min_grad: f64,
    pub max_grad: f64,
    /// Meridian arclength of the contour.
    pub arclength: f64,
}

impl LevelSet {
    pub fn regular(&self) -> bool {
        self.min_grad >= REGULAR_FRACTION * self.max_grad
    }

    /// Hypersurface area of the level set.
    pub fn area(&self) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * p.rot_weight * p.dl).sum()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Edge {
    /// Between `(i, j)` and `(i+1, j)`.
    S(usize, usize),
    /// Between `(i, j)` and `(i, j+1)`.
    T(usize, usize),
}

fn marching_squares(field: &SolutionField, level: f64) -> Result<Vec<(f64, f64)>> {
    let g = &field.grid;
    let above = |i: usize, j: usize| field.at(i, j) > level;
    let frac = |a: f64, b: f64| ((level - a) / (b - a)).clamp(0.0, 1.0);
    let point = |e: Edge| -> (f64, f64) {
        match e {
            Edge::S(i, j) => {
                let f = frac(field.at(i, j), field.at(i + 1, j));
                let lr = g.log_r(i, j) + f * (g.log_r(i + 1, j) - g.log_r(i, j));
                (lr.exp(), g.theta[j])
            }
            Edge::T(i, j) => {
                let f = frac(field.at(i, j), field.at(i, j + 1));
                let lr = g.log_r(i, j) + f * (g.log_r(i, j + 1) - g.log_r(i, j));
                (lr.exp(), g.theta[j] + f * (g.theta[j + 1] - g.theta[j]))
            }
        }
    };
    let mut adj: HashMap<Edge, Vec<Edge>> = HashMap::new();
    let mut link = |a: Edge, b: Edge| {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    };
    for i in 0..g.ns - 1 {
        for j in 0..g.ntheta - 1 {
            // corners counter-clockwise: (i,j) (i+1,j) (i+1,j+1) (i,j+1)
            let c = [above(i, j), above(i + 1, j), above(i + 1, j + 1), above(i, j + 1)];
            let edges = [Edge::S(i, j), Edge::T(i + 1, j), Edge::S(i, j + 1), Edge::T(i, j)];
            let cut: Vec<Edge> = (0..4).filter(|&e| c[e] != c[(e + 1) % 4]).map(|e| edges[e]).collect();
            match cut.len() {
                0 => {}
                2 => link(cut[0], cut[1]),
                _ => {
                    let centre = 0.25 * (field.at(i, j) + field.at(i + 1, j) + field.at(i + 1, j + 1) + field.at(i, j + 1));
                    // saddle: pair edges so the centre's side is connected
                    if (centre > level) == c[0] {
                        link(edges[0], edges[1]);
                        link(edges[2], edges[3]);
                    } else {
                        link(edges[3], edges[0]);
                        link(edges[1], edges[2]);
                    }
                }
            }
        }
    }
    let start = (0..g.ns - 1)
        .map(|i| Edge::S(i, 0))
        .find(|e| adj.contains_key(e))
        .ok_or_else(|| Error::Domain(format!("level {level} does not reach the symmetry axis")))?;
    let mut chain = vec![start];
    let mut prev: Option<Edge> = None;
    let mut cur = start;
    loop {
        let next = adj[&cur].iter().copied().find(|&e| Some(e) != prev);
        match next {
            Some(e) if adj[&cur].len() <= 2 => {
                prev = Some(cur);
                cur = e;
                chain.push(e);
                if chain.len() > adj.len() {
                    return Err(Error::Domain(format!("level {level} contour does not terminate")));
                }
            }
            _ => break,
        }
    }
    let end_ok = matches!(cur, Edge::S(_, j) if j == g.ntheta - 1);
    if !end_ok || chain.len() != adj.len() {
        return Err(Error::Domain(format!(
            "level {level} is not a single curve from axis to axis ({} of {} contour edges connected)",
            chain.len(),
            adj.len()
        )));
    }
    Ok(chain.into_iter().map(point).collect())
}

/// Least-squares cosine fit `r(θ) ≈ Σ c_m cos(mθ)`; returns `(r, r', r'')` at the fit nodes.
fn cosine_fit(theta: &[f64], r: &[f64], modes: usize) -> Result<Vec<[f64; 3]>> {
    let a = DMatrix::from_fn(theta.len(), modes, |q, m| (m as f64 * theta[q]).cos());
    let c = a
        .clone()
        .svd(true, true)
        .solve(&DVector::from_column_slice(r), 1e-13)
        .map_err(|e| Error::Domain(format!("contour fit failed: {e}")))?;
    Ok(theta
        .iter()
        .map(|&t| {
            let mut out = [0.0; 3];
            for (m, cm) in c.iter().enumerate() {
                let mf = m as f64;
                out[0] += cm * (mf * t).cos();
                out[1] -= cm * mf * (mf * t).sin();
                out[2] -= cm * mf * mf * (mf * t).cos();
            }
            out
        })
        .collect())
}

fn find_root(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mut flo, mut fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return lo;
    }
    // Illinois false position
    let mut side = 0;
    let mut last = f64::NAN;
    for _ in 0..200 {
        let x = (lo * fhi - hi * flo) / (fhi - flo);
        let fx = f(x);
        if fx == 0.0 || (x - last).abs() < 1e-15 {
            return x;
        }
        last = x;
        if (fx > 0.0) == (fhi > 0.0) {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        } else {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        }
    }
    0.5 * (lo + hi)
}

/// Extracts `{u = level}` with [`DEFAULT_NODES`] quadrature nodes.
pub fn extract_level_set(field: &SolutionField, level: f64) -> Result<LevelSet> {
    extract_level_set_with(&FieldInterpolant::new(field), level, DEFAULT_NODES)
}

pub fn extract_level_set_with(interp: &FieldInterpolant, level: f64, nodes: usize) -> Result<LevelSet> {
    let field = interp.field;
    let g = &field.grid;
    let (n, k) = (g.n, g.k);
    if !(-1.0..0.0).contains(&level) {
        return Err(Error::Domain(format!("level {level} outside [-1, 0)")));
    }
    let outer = (0..g.ntheta).map(|j| field.at(g.ns - 1, j)).fold(f64::INFINITY, f64::min);
    let below_outer = (0..g.ntheta).map(|j| field.at(g.ns - 2, j)).fold(f64::INFINITY, f64::min);
    if level >= outer.min(below_outer) {
        return Err(Error::Domain(format!(
            "level {level} reaches the artificial boundary ∂B_R (u = {outer:.6} there); choose |s| larger"
        )));
    }
    let polyline = marching_squares(field, level)?;

    let nodes = NonZeroUsize::new(nodes.max(8)).expect("positive");
    let rule = GaussLegendre::new(nodes);
    let (theta, weights): (Vec<f64>, Vec<f64>) = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * PI * (x + 1.0), 0.5 * PI * w))
        .unzip();

    let mut s_nodes = Vec::with_capacity(theta.len());
    for &t in &theta {
        if level <= -1.0 {
            s_nodes.push(0.0);
            continue;
        }
        let col = interp.column_u(t);
        let crossings: Vec<usize> = (0..g.ns - 1).filter(|&i| (col[i] > level) != (col[i + 1] > level)).collect();
        if crossings.len() != 1 {
            return Err(Error::Domain(format!(
                "level {level} crosses the ray θ = {t:.4} {} times; only radial graphs are supported",
                crossings.len()
            )));
        }
        let i = crossings[0];
        let (lo, hi) = (g.s[i], g.s[i + 1]);
        s_nodes.push(find_root(lo, hi, |s| interp.eval(s, t)[0] - level));
    }
    let radii: Vec<f64> = s_nodes.iter().zip(&theta).map(|(&s, &t)| interp.r_of(s, t)).collect();
    let fit = cosine_fit(&theta, &radii, (nodes.get() / 4).max(4))?;
    let omega = sphere_area(n - 2);

    let mut points = Vec::with_capacity(theta.len());
    for (q, (&t, &s)) in theta.iter().zip(&s_nodes).enumerate() {
        let d = interp.eval(s, t);
        let r = radii[q];
        let h = AxisymHessian::new(&to_axisym(&d), r, t, n)?;
        let grad = [d[1], d[2] / r];
        let gn = grad[0].hypot(grad[1]);
        let mut hm = SymMatrix::from_diagonal(&vec![h.az; n]);
        hm.set(0, 0, h.rr);
        hm.set(0, 1, h.rt);
        hm.set(1, 1, h.tt);
        let tk = newton_tensor(&hm, k)?;
        let newton_form = tk.get(0, 0) * grad[0] * grad[0]
            + 2.0 * tk.get(0, 1) * grad[0] * grad[1]
            + tk.get(1, 1) * grad[1] * grad[1];

        let [rf, rp, rpp] = fit[q];
        let speed = rf.hypot(rp);
        let kappa_m = (rf * rf + 2.0 * rp * rp - rf * rpp) / speed.powi(3);
        let (sn, cs) = t.sin_cos();
        let kappa_az = (rf * sn - rp * cs) / (speed * rf * sn);
        let mut kappa = vec![kappa_az; n - 1];
        kappa[0] = kappa_m;
        let sigma_km1 = elem_sym_all(&kappa, k - 1)[k - 1];

        let rp_grad = if d[1] != 0.0 { -d[2] / d[1] } else { 0.0 };
        points.push(LevelPoint {
            theta: t,
            r,
            grad_norm: gn,
            normal: [grad[0] / gn, grad[1] / gn],
            newton_form,
            sigma_km1,
            rot_weight: omega * (r * sn).powi(n as i32 - 2),
            dl: r.hypot(rp_grad),
            dl_fit: speed,
        });
    }
    let min_grad = points.iter().map(|p| p.grad_norm).fold(f64::INFINITY, f64::min);
    let max_grad = points.iter().map(|p| p.grad_norm).fold(0.0, f64::max);
    let arclength = points.iter().zip(&weights).map(|(p, w)| w * p.dl).sum();
    let set = LevelSet {
        level,
        n,
        k,
        polyline,
        points,
        weights,
        min_grad,
        max_grad,
        arclength,
    };
    if !set.regular() {
        return Err(Error::Rejected(format!(
            "level {level} is irregular: min |∇u| = {min_grad:.3e} < {REGULAR_FRACTION:e} · max |∇u| = {max_grad:.3e}"
        )));
    }
    Ok(set)
}
