//! Random spectra in Gårding cones, for the randomized identity suites.
//!
//! Interior samples are drawn uniformly on the unit sphere and rejected until
//! they land in `Γ_m`. Boundary samples start from an interior sample and
//! push one entry down toward `∂Γ_m` by bisection, stopping a random
//! (log-uniform) relative distance short of the boundary.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{in_gamma_k_tol, KatoConfig, Spectrum};

const MAX_REJECTIONS: usize = 10_000;

fn unit_gaussian<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..len).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// A spectrum of length `len` in the open cone `Γ_m` (`m = 0` accepts anything).
pub fn interior<R: Rng + ?Sized>(rng: &mut R, len: usize, m: usize) -> Vec<f64> {
    for _ in 0..MAX_REJECTIONS {
        let v = unit_gaussian(rng, len);
        if in_gamma_k_tol(&v, m, true, 0.0) {
            return v;
        }
    }
    // Fall back to shifting toward the positive diagonal, which lies in every Γ_m.
    let mut v = unit_gaussian(rng, len);
    let mut shift = 0.1;
    while !in_gamma_k_tol(&v, m, true, 0.0) {
        v.iter_mut().for_each(|x| *x += shift);
        shift *= 2.0;
    }
    v
}

/// A spectrum in `Γ_m` close to `∂Γ_m`: one entry is lowered to a point a
/// relative distance in `[1e-12, 1e-1]` inside the boundary.
pub fn near_boundary<R: Rng + ?Sized>(rng: &mut R, len: usize, m: usize) -> Vec<f64> {
    let mut v = interior(rng, len, m);
    if m == 0 {
        return v;
    }
    let i = rng.random_range(0..len);
    let base = v[i];
    let inside = |t: f64, v: &mut Vec<f64>| {
        v[i] = base - t;
        in_gamma_k_tol(v, m, true, 0.0)
    };
    // Bracket the exit point; Γ_m is convex so it is unique along the ray.
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while inside(hi, &mut v) {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if inside(mid, &mut v) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi.max(1.0) {
            break;
        }
    }
    let gap: f64 = 10f64.powf(rng.random_range(-12.0..-1.0));
    v[i] = base - lo * (1.0 - gap);
    if !in_gamma_k_tol(&v, m, true, 0.0) {
        v[i] = base - lo;
    }
    v
}

/// A random admissible Kato configuration: `λ' ∈ Γ_{k-1}` with
/// `S_{k-1}(λ') > 0`, Gaussian mixed entries, `u_nn` solved from `S_k = 0`,
/// then normalized so the largest Hessian entry has magnitude 1.
pub fn kato_config<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize, boundary: bool) -> KatoConfig {
    loop {
        let lp = if boundary {
            near_boundary(rng, n - 1, k - 1)
        } else {
            interior(rng, n - 1, k - 1)
        };
        let mixed: Vec<f64> = (0..n - 1).map(|_| StandardNormal.sample(rng)).collect();
        let Ok(spectrum) = Spectrum::new(lp.clone()) else { continue };
        let Ok(cfg) = KatoConfig::new(n, k, spectrum, mixed.clone()) else { continue };
        let Ok(u_nn) = cfg.solved_u_nn() else { continue };
        let big = lp
            .iter()
            .chain(mixed.iter())
            .chain(std::iter::once(&u_nn))
            .fold(0.0_f64, |a, v| a.max(v.abs()));
        if !big.is_finite() || big == 0.0 {
            continue;
        }
        let lp: Vec<f64> = lp.iter().map(|v| v / big).collect();
        let mixed: Vec<f64> = mixed.iter().map(|v| v / big).collect();
        let Ok(spectrum) = Spectrum::new(lp) else { continue };
        let Ok(cfg) = KatoConfig::new(n, k, spectrum, mixed) else { continue };
        if cfg.solved_u_nn().is_ok() {
            return cfg;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfun::elem_sym_all;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_land_in_cone() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in 1..=3 {
            for _ in 0..200 {
                let v = interior(&mut rng, 6, m);
                assert!(in_gamma_k_tol(&v, m, true, 0.0));
                let b = near_boundary(&mut rng, 6, m);
                assert!(in_gamma_k_tol(&b, m, true, 0.0));
            }
        }
    }

    #[test]
    fn boundary_samples_are_close_to_the_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut closest = f64::INFINITY;
        for _ in 0..200 {
            let b = near_boundary(&mut rng, 5, 2);
            let s = elem_sym_all(&b, 2);
            closest = closest.min(s[2].abs() / (1.0 + s[1].abs()));
        }
        assert!(closest < 1e-6, "{closest}");
    }
}
