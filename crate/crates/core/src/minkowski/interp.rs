//! Off-grid evaluation of a solved field and its physical derivatives.

use crate::geometry::AxisymDerivs;
use crate::solver::SolutionField;

/// Parity of `(u, u_r, u_θ, u_rr, u_rθ, u_θθ)` under reflection through the axis.
const PARITY: [f64; 6] = [1.0, 1.0, -1.0, 1.0, -1.0, 1.0];

/// Point values `(u, u_r, u_θ, u_rr, u_rθ, u_θθ)`.
pub type PointDerivs = [f64; 6];

pub fn to_axisym(d: &PointDerivs) -> AxisymDerivs {
    AxisymDerivs {
        u_r: d[1],
        u_theta: d[2],
        u_rr: d[3],
        u_rtheta: d[4],
        u_thetatheta: d[5],
    }
}

fn lagrange4(x: f64) -> [f64; 4] {
    // nodes at 0, 1, 2, 3
    [
        -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0,
        x * (x - 2.0) * (x - 3.0) / 2.0,
        -x * (x - 1.0) * (x - 3.0) / 2.0,
        x * (x - 1.0) * (x - 2.0) / 6.0,
    ]
}

/// Tensor-product cubic interpolation in the computational `(s, θ)` plane of
/// the derivatives reconstructed at the nodes.
#[derive(Debug, Clone)]
pub struct FieldInterpolant<'a> {
    pub field: &'a SolutionField,
    data: [Vec<f64>; 6],
}

impl<'a> FieldInterpolant<'a> {
    pub fn new(field: &'a SolutionField) -> Self {
        let g = &field.grid;
        let mut data: [Vec<f64>; 6] = Default::default();
        for i in 0..g.ns {
            for j in 0..g.ntheta {
                let d = field.derivs(i, j);
                let vals = [field.at(i, j), d.u_r, d.u_theta, d.u_rr, d.u_rtheta, d.u_thetatheta];
                for (q, v) in vals.into_iter().enumerate() {
                    data[q].push(v);
                }
            }
        }
        FieldInterpolant { field, data }
    }

    fn xi(&self, s: f64) -> f64 {
        let c = self.field.grid.grading;
        if c.abs() < 1e-12 {
            s
        } else {
            (c * s).exp_m1() / c.exp_m1()
        }
    }

    /// Computational coordinate of radius `r` on the ray `θ`; `None` outside the annulus.
    pub fn s_of(&self, r: f64, theta: f64) -> Option<f64> {
        let g = &self.field.grid;
        let a = g.surface.rho(theta).ln();
        let xi = (r.ln() - a) / (g.r_outer.ln() - a);
        if !(-1e-12..=1.0 + 1e-12).contains(&xi) {
            return None;
        }
        let xi = xi.clamp(0.0, 1.0);
        let c = g.grading;
        Some(if c.abs() < 1e-12 {
            xi
        } else {
            (xi * c.exp_m1()).ln_1p() / c
        })
    }

    pub fn r_of(&self, s: f64, theta: f64) -> f64 {
        let g = &self.field.grid;
        let a = g.surface.rho(theta).ln();
        (a + (g.r_outer.ln() - a) * self.xi(s)).exp()
    }

    fn s_weights(&self, s: f64) -> (usize, [f64; 4]) {
        let ns = self.field.grid.ns;
        let x = s.clamp(0.0, 1.0) * (ns - 1) as f64;
        let i0 = (x.floor() as isize - 1).clamp(0, ns as isize - 4) as usize;
        (i0, lagrange4(x - i0 as f64))
    }

    /// Column indices and reflection flags of the four θ nodes around `theta`.
    fn t_weights(&self, theta: f64) -> ([(usize, bool); 4], [f64; 4]) {
        let nt = self.field.grid.ntheta as isize;
        let y = theta.clamp(0.0, std::f64::consts::PI) / self.field.grid.theta[1];
        let j0 = (y.floor() as isize - 1).min(nt - 3);
        let mut cols = [(0usize, false); 4];
        for (m, c) in cols.iter_mut().enumerate() {
            let j = j0 + m as isize;
            *c = if j < 0 {
                ((-j) as usize, true)
            } else if j > nt - 1 {
                ((2 * (nt - 1) - j) as usize, true)
            } else {
                (j as usize, false)
            };
        }
        (cols, lagrange4(y - j0 as f64))
    }

    pub fn eval(&self, s: f64, theta: f64) -> PointDerivs {
        let nt = self.field.grid.ntheta;
        let (i0, ws) = self.s_weights(s);
        let (cols, wt) = self.t_weights(theta);
        let mut out = [0.0; 6];
        for (q, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (a, &wa) in ws.iter().enumerate() {
                let row = (i0 + a) * nt;
                for (&(j, refl), &wb) in cols.iter().zip(&wt) {
                    let sign = if refl { PARITY[q] } else { 1.0 };
                    acc += wa * wb * sign * self.data[q][row + j];
                }
            }
            *o = acc;
        }
        out
    }

    /// `u` at every radial node of the ray `θ`.
    pub fn column_u(&self, theta: f64) -> Vec<f64> {
        let nt = self.field.grid.ntheta;
        let (cols, wt) = self.t_weights(theta);
        (0..self.field.grid.ns)
            .map(|i| cols.iter().zip(&wt).map(|(&(j, _), &w)| w * self.data[0][i * nt + j]).sum())
            .collect()
    }
}
