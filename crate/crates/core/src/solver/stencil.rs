//! Finite-difference weights and the sparse linear solve.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::error::{Error, Result};

/// Fornberg's algorithm: weights for derivatives `0..=order` at `z` from
/// values at `nodes`. Returns `w[d][j]`.
pub fn fornberg(z: f64, nodes: &[f64], order: usize) -> Vec<Vec<f64>> {
    let m = nodes.len();
    let mut c = vec![vec![0.0; m]; order + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..m {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// A one-dimensional stencil: `Σ w_j U[idx_j]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Stencil {
    pub idx: Vec<usize>,
    pub w: Vec<f64>,
}

impl Stencil {
    pub fn apply(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.idx.iter().zip(&self.w).map(|(&i, &w)| w * f(i)).sum()
    }
}

/// First- and second-derivative stencils on a non-periodic 1-D node set,
/// fourth order: five centered points in the interior, six one-sided
/// points near the ends.
pub fn open_stencils(x: &[f64]) -> (Vec<Stencil>, Vec<Stencil>) {
    let n = x.len();
    assert!(n >= 6, "need at least 6 nodes");
    let mut d1 = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = if i >= 2 && i + 2 < n {
            (i - 2, i + 2)
        } else if i < 2 {
            (0, 5)
        } else {
            (n - 6, n - 1)
        };
        let idx: Vec<usize> = (lo..=hi).collect();
        let nodes: Vec<f64> = idx.iter().map(|&j| x[j]).collect();
        let w = fornberg(x[i], &nodes, 2);
        d1.push(Stencil {
            idx: idx.clone(),
            w: w[1].clone(),
        });
        d2.push(Stencil { idx, w: w[2].clone() });
    }
    (d1, d2)
}

/// Centered five-point stencils on uniform `θ_j = jπ/(m−1)` with even
/// reflection across both poles. Weights on mirrored nodes are folded.
pub fn polar_stencils(m: usize) -> (Vec<Stencil>, Vec<Stencil>) {
    assert!(m >= 3, "need at least 3 angular nodes");
    let h = std::f64::consts::PI / (m - 1) as f64;
    let base = fornberg(0.0, &[-2.0 * h, -h, 0.0, h, 2.0 * h], 2);
    let reflect = |j: isize| -> usize {
        let top = (m - 1) as isize;
        let mut j = j;
        if j < 0 {
            j = -j;
        }
        if j > top {
            j = 2 * top - j;
        }
        j as usize
    };
    let fold = |j: usize, w: &[f64]| -> Stencil {
        let mut acc: Vec<(usize, f64)> = Vec::new();
        for (o, &wt) in w.iter().enumerate() {
            let target = reflect(j as isize + o as isize - 2);
            match acc.iter_mut().find(|(t, _)| *t == target) {
                Some(entry) => entry.1 += wt,
                None => acc.push((target, wt)),
            }
        }
        Stencil {
            idx: acc.iter().map(|p| p.0).collect(),
            w: acc.iter().map(|p| p.1).collect(),
        }
    };
    let d1 = (0..m).map(|j| fold(j, &base[1])).collect();
    let d2 = (0..m).map(|j| fold(j, &base[2])).collect();
    (d1, d2)
}

/// Solves a sparse square system given as triplets.
pub fn sparse_solve(dim: usize, triplets: &[(usize, usize, f64)], rhs: &[f64]) -> Result<Vec<f64>> {
    let trips: Vec<Triplet<usize, usize, f64>> =
        triplets.iter().map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(dim, dim, &trips)
        .map_err(|e| Error::Precondition(format!("sparse assembly failed: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::Precondition(format!("Jacobian factorization failed ({e:?}); refine the grid")))?;
    let b = Mat::<f64>::from_fn(dim, 1, |i, _| rhs[i]);
    let x = lu.solve(&b);
    let out: Vec<f64> = (0..dim).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition(
            "Jacobian is numerically singular; refine the grid".into(),
        ));
    }
    Ok(out)
}
