//! Nodal solution values, derivative reconstruction and the field dump format.
//!
//! Dump layout: an ASCII header of `key value...` lines terminated by the line
//! `end_header`, then `n_s · n_θ` little-endian IEEE-754 `f64` values in
//! row-major order (`s` slowest, `θ` fastest).

use std::io::{BufRead, Write};

use super::grid::AnnulusGrid;
use crate::error::{Error, Result};
use crate::geometry::{AxisymDerivs, AxisymHessian, RadialSurface};

pub const DUMP_MAGIC: &str = "khlab-field 1";

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub grid: AnnulusGrid,
    /// Row-major nodal values, index `i · n_θ + j`.
    pub u: Vec<f64>,
    /// Outer Dirichlet value the field was solved with.
    pub outer_value: f64,
}

impl SolutionField {
    pub fn from_fn(grid: AnnulusGrid, outer_value: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let u = (0..grid.ns)
            .flat_map(|i| (0..grid.ntheta).map(move |j| (i, j)))
            .map(|(i, j)| f(grid.r(i, j), grid.theta[j]))
            .collect();
        SolutionField { grid, u, outer_value }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.u[self.grid.idx(i, j)]
    }

    pub fn derivs(&self, i: usize, j: usize) -> AxisymDerivs {
        let [u_r, u_theta, u_rr, u_rtheta, u_thetatheta] =
            self.grid.to_physical(i, j, self.grid.comp_derivs(&self.u, i, j));
        AxisymDerivs {
            u_r,
            u_theta,
            u_rr,
            u_rtheta,
            u_thetatheta,
        }
    }

    pub fn hessian(&self, i: usize, j: usize) -> Result<AxisymHessian> {
        AxisymHessian::new(&self.derivs(i, j), self.grid.r(i, j), self.grid.theta[j], self.grid.n)
    }

    pub fn grad_norm(&self, i: usize, j: usize) -> f64 {
        let d = self.derivs(i, j);
        d.u_r.hypot(d.u_theta / self.grid.r(i, j))
    }

    /// Largest absolute Hessian eigenvalue at a node.
    pub fn hess_norm(&self, i: usize, j: usize) -> Result<f64> {
        Ok(self
            .hessian(i, j)?
            .eigenvalues()
            .iter()
            .fold(0.0_f64, |a, v| a.max(v.abs())))
    }

    /// Cubic interpolation of nodal data `vals` along column `j` in `log r`.
    /// `r` outside the column is clamped.
    pub fn interp_column(&self, vals: &[f64], j: usize, r: f64) -> f64 {
        let g = &self.grid;
        let t = r.ln();
        let ts: Vec<f64> = (0..g.ns).map(|i| g.log_r(i, j)).collect();
        let pos = ts.partition_point(|&x| x < t);
        let base = pos.saturating_sub(2).min(g.ns - 4);
        let mut acc = 0.0;
        for a in base..base + 4 {
            let mut w = 1.0;
            for b in base..base + 4 {
                if a != b {
                    w *= (t - ts[b]) / (ts[a] - ts[b]);
                }
            }
            acc += w * vals[g.idx(a, j)];
        }
        acc
    }

    /// Resamples this field onto another grid with the same angular nodes.
    ///
    /// When the outer radius grows, each column hands over on
    /// `[R_old/4, R_old/2]` to its fitted asymptote `a + c·μ`, and the
    /// mismatch with the new outer value is spread with the weight
    /// `(μ(r) − μ(ρ))/(μ(R) − μ(ρ))`, keeping the start smooth.
    pub fn resample(&self, target: &AnnulusGrid, outer_value: f64) -> Result<SolutionField> {
        if target.ntheta != self.grid.ntheta {
            return Err(Error::Domain("resampling requires identical angular grids".into()));
        }
        let a0 = target.n as f64 / target.k as f64 - 2.0;
        let mu = |r: f64| -r.powf(-a0);
        let r_old = self.grid.r_outer;
        let grows = target.r_outer > r_old * (1.0 + 1e-12);
        let mut u = vec![0.0; target.len()];
        for j in 0..target.ntheta {
            let (a, c) = self.column_asymptote(j, a0);
            let ext = |r: f64| {
                if !grows || r <= 0.25 * r_old {
                    return self.interp_column(&self.u, j, r.min(r_old));
                }
                let tail = a + c * mu(r);
                if r >= 0.5 * r_old {
                    return tail;
                }
                let x = (r / (0.25 * r_old)).ln() / 2f64.ln();
                let h = x * x * (3.0 - 2.0 * x);
                (1.0 - h) * self.interp_column(&self.u, j, r) + h * tail
            };
            let rho = target.r(0, j);
            let big_r = target.r_outer;
            let (d_in, d_out) = (-1.0 - ext(rho), outer_value - ext(big_r));
            for i in 0..target.ns {
                let r = target.r(i, j);
                let w = (mu(r) - mu(rho)) / (mu(big_r) - mu(rho));
                u[target.idx(i, j)] = ext(r) + (1.0 - w) * d_in + w * d_out;
            }
        }
        let mut out = SolutionField {
            grid: target.clone(),
            u,
            outer_value,
        };
        out.impose_dirichlet();
        Ok(out)
    }

    /// Least-squares `u ≈ a + c·μ` on column `j` over `r ∈ [R/4, R/2]`.
    fn column_asymptote(&self, j: usize, a0: f64) -> (f64, f64) {
        let g = &self.grid;
        let pts: Vec<(f64, f64)> = (0..g.ns)
            .map(|i| (g.r(i, j), self.at(i, j)))
            .filter(|&(r, _)| (0.25 * g.r_outer..=0.5 * g.r_outer).contains(&r))
            .map(|(r, v)| (-r.powf(-a0), v))
            .collect();
        let edge = || (0.0, -self.at(g.ns - 1, j) * g.r_outer.powf(a0));
        if pts.len() < 2 {
            return edge();
        }
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
        let (mx, my) = (sx / m, sy / m);
        let (sxx, sxy) = pts
            .iter()
            .fold((0.0, 0.0), |acc, p| (acc.0 + (p.0 - mx).powi(2), acc.1 + (p.0 - mx) * (p.1 - my)));
        if sxx <= 0.0 {
            return edge();
        }
        let c = sxy / sxx;
        (my - c * mx, c)
    }

    pub fn impose_dirichlet(&mut self) {
        let g = &self.grid;
        for j in 0..g.ntheta {
            self.u[g.idx(0, j)] = -1.0;
            self.u[g.idx(g.ns - 1, j)] = self.outer_value;
        }
    }

    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        let g = &self.grid;
        let coeffs: Vec<String> = g.surface.coeffs().iter().map(|c| format!("{c:e}")).collect();
        writeln!(w, "{DUMP_MAGIC}")?;
        writeln!(w, "n {}", g.n)?;
        writeln!(w, "k {}", g.k)?;
        writeln!(w, "R {:e}", g.r_outer)?;
        writeln!(w, "eps {:e}", g.eps)?;
        writeln!(w, "rho {}", coeffs.join(" "))?;
        writeln!(w, "shape {} {}", g.ns, g.ntheta)?;
        writeln!(w, "grading {:e}", g.grading)?;
        writeln!(w, "outer_value {:e}", self.outer_value)?;
        writeln!(w, "byte_order little_endian")?;
        writeln!(w, "dtype f64")?;
        writeln!(w, "end_header")?;
        for v in &self.u {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(mut r: R) -> Result<SolutionField> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        if line.trim_end() != DUMP_MAGIC {
            return Err(Error::Parse(format!("not a field dump (first line `{}`)", line.trim_end())));
        }
        let mut fields = std::collections::BTreeMap::new();
        loop {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                return Err(Error::Parse("header ended without `end_header`".into()));
            }
            let l = line.trim_end();
            if l == "end_header" {
                break;
            }
            let (key, value) = l
                .split_once(' ')
                .ok_or_else(|| Error::Parse(format!("malformed header line `{l}`")))?;
            fields.insert(key.to_string(), value.to_string());
        }
        let get = |key: &str| -> Result<&String> {
            fields
                .get(key)
                .ok_or_else(|| Error::Parse(format!("dump header missing `{key}`")))
        };
        let num = |key: &str| -> Result<f64> {
            get(key)?
                .parse()
                .map_err(|_| Error::Parse(format!("header `{key}` is not a number")))
        };
        if get("byte_order")? != "little_endian" || get("dtype")? != "f64" {
            return Err(Error::Parse("unsupported payload encoding".into()));
        }
        let n = num("n")? as usize;
        let k = num("k")? as usize;
        let coeffs = get("rho")?
            .split_whitespace()
            .map(|c| c.parse::<f64>().map_err(|_| Error::Parse(format!("bad coefficient `{c}`"))))
            .collect::<Result<Vec<f64>>>()?;
        let shape: Vec<usize> = get("shape")?
            .split_whitespace()
            .map(|c| c.parse::<usize>().map_err(|_| Error::Parse(format!("bad shape entry `{c}`"))))
            .collect::<Result<Vec<usize>>>()?;
        if shape.len() != 2 {
            return Err(Error::Parse("shape needs two entries".into()));
        }
        let surface = RadialSurface::new(n, coeffs)?;
        let grid = AnnulusGrid::new(&surface, k, num("R")?, num("eps")?, shape[0], shape[1], Some(num("grading")?))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != grid.len() * 8 {
            return Err(Error::Parse(format!(
                "payload has {} bytes, expected {}",
                bytes.len(),
                grid.len() * 8
            )));
        }
        let u = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Ok(SolutionField {
            grid,
            u,
            outer_value: num("outer_value")?,
        })
    }
}
