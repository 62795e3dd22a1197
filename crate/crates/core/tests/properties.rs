use khlab_core::barriers::{alpha0, f_eps, mu_exact, radial_ball_solution, BarrierFamily};
use khlab_core::geometry::{axisym_hessian_eigs, AxisymDerivs, RadialSurface};
use khlab_core::minkowski::{radial_phi, sphere_area};
use khlab_core::solver::{AnnulusGrid, SolutionField, SolverConfig};
use khlab_core::symfun::{
    elem_sym, elem_sym_omit, gamma_margins, in_gamma_k, newton_tensor, sigma_k_of_matrix, Spectrum, SymMatrix,
};
use proptest::prelude::*;

fn subset_sum(values: &[f64], k: usize) -> f64 {
    let n = values.len();
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| values[i]).product::<f64>())
        .sum()
}

fn spectrum(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 2..=max_len)
}

proptest! {
    #[test]
    fn elem_sym_matches_subset_enumeration(v in spectrum(8), k in 0usize..=8) {
        prop_assume!(k <= v.len());
        let got = elem_sym(&Spectrum::new(v.clone()).unwrap(), k as i64).unwrap();
        let want = subset_sum(&v, k);
        let scale = v.iter().fold(1.0f64, |a, x| a.max(x.abs())).powi(k as i32) * subset_count(v.len(), k);
        prop_assert!((got - want).abs() <= 1e-12 * scale, "{} vs {}", got, want);
    }

    #[test]
    fn expansion_along_each_entry(v in spectrum(7), k in 1usize..=7) {
        prop_assume!(k <= v.len());
        let s = Spectrum::new(v.clone()).unwrap();
        let total = elem_sym(&s, k as i64).unwrap();
        let scale = v.iter().fold(1.0f64, |a, x| a.max(x.abs())).powi(k as i32) * subset_count(v.len(), k);
        for i in 0..v.len() {
            // σ_k of n−1 entries vanishes when k = n
            let rest = if k < v.len() { elem_sym_omit(&s, k as i64, &[i]).unwrap() } else { 0.0 };
            let split = v[i] * elem_sym_omit(&s, k as i64 - 1, &[i]).unwrap() + rest;
            prop_assert!((total - split).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn euler_identity_for_newton_tensor(entries in prop::collection::vec(-2.0f64..2.0, 36), k in 1usize..=6) {
        let a = SymMatrix::from_upper(6, |i, j| entries[6 * i + j]);
        let t = newton_tensor(&a, k).unwrap();
        let lhs = t.frobenius_dot(&a);
        let rhs = k as f64 * sigma_k_of_matrix(&a, k).unwrap();
        let scale = a.max_abs().max(1.0).powi(k as i32) * subset_count(6, k);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn cone_membership_agrees_with_margins(v in spectrum(6), k in 1usize..=6) {
        prop_assume!(k <= v.len());
        let inside = in_gamma_k(&Spectrum::new(v.clone()).unwrap(), k, true);
        let margins = gamma_margins(&v, k);
        prop_assert_eq!(inside, margins.iter().all(|m| *m > 0.0));
    }

    #[test]
    fn barrier_eigen_pair_is_consistent(r in 0.2f64..50.0, eps in 0.0f64..0.5, c in 0.1f64..5.0) {
        let fam = BarrierFamily::new(5, 2, eps, c).unwrap();
        let (radial, tangential) = fam.eigen_pair(r);
        prop_assert!((radial - fam.drr(r)).abs() <= 1e-12 * radial.abs());
        prop_assert!((tangential - fam.dr(r) / r).abs() <= 1e-12 * tangential.abs());
        let mut eig = vec![tangential / c; 5];
        eig[0] = radial / c;
        let s2 = elem_sym(&Spectrum::new(eig).unwrap(), 2).unwrap();
        let f = f_eps(5, 2, eps, r).unwrap();
        let scale = 10.0 * (tangential / c).powi(2);
        prop_assert!((s2 - f).abs() <= 1e-12 * scale, "{} vs {}", s2, f);
    }

    #[test]
    fn ball_solution_scales_with_radius(rho0 in 0.5f64..3.0, t in 1.0f64..20.0) {
        let r = rho0 * t;
        let u = radial_ball_solution(5, 2, rho0, r).unwrap();
        prop_assert!((u + t.powf(-alpha0(5, 2))).abs() < 1e-14);
    }

    #[test]
    fn rotationally_symmetric_fields_have_radial_spectra(r in 0.3f64..10.0, theta in 0.05f64..3.09) {
        let (_, ur) = mu_exact(5, 2, r);
        let d = AxisymDerivs { u_r: ur, u_rr: -1.5 * ur / r, ..Default::default() };
        let eig = axisym_hessian_eigs(&d, r, theta, 5).unwrap();
        prop_assert!(elem_sym(&eig, 2).unwrap().abs() <= 1e-12 * (ur / r).powi(2) * 10.0);
    }

    #[test]
    fn solver_config_text_round_trips(ns in 16usize..1024, nt in 3usize..128, tol in 1e-12f64..1e-4) {
        let cfg = SolverConfig { ns, ntheta: nt, tol_res: tol, eps_schedule: vec![1e-3, 1e-5], ..Default::default() };
        prop_assert_eq!(SolverConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }
}

fn subset_count(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[test]
fn radial_phi_ball_value() {
    let v = radial_phi(5, 2, 1.0, 1.0);
    assert!((v - 13.15947253478581).abs() < 1e-12);
    // |S²| = 4π, |S³| = 2π²
    assert!((sphere_area(2) - 4.0 * std::f64::consts::PI).abs() < 1e-13);
    assert!((sphere_area(3) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-13);
}

#[test]
fn field_dump_round_trips() {
    let s = RadialSurface::new(5, vec![1.0, 0.0, 0.1]).unwrap();
    let grid = AnnulusGrid::new(&s, 2, 30.0, 1e-3, 40, 7, None).unwrap();
    let f = SolutionField::from_fn(grid, -0.2, |r, t| -r.powf(-0.5) * (1.0 + 0.01 * t.cos()));
    let mut bytes = Vec::new();
    f.write_dump(&mut bytes).unwrap();
    let back = SolutionField::read_dump(bytes.as_slice()).unwrap();
    assert_eq!(back, f);
}
