use proptest::prelude::*;
use xxness::ness::{
    boundary_rdm, bulk_lambda_min, bulk_rdm, dephasing_gamma_c, ness_expectations, nn_pair_rdm, right_boundary_rdm,
};
use xxness::numerics::bisect_sign;
use xxness::oracle::*;
use xxness::params::{from_square, ChainSpec, DephasingSpec, DrivingParams, SquareCoords};
use xxness::twoqubit::TwoQubitState;
use xxness::Error;

fn params(gl: f64, gr: f64, mu: f64, mb: f64) -> DrivingParams {
    DrivingParams::new(gl, gr, mu, mb).unwrap()
}

fn solve(n: usize, p: DrivingParams, g: f64) -> SteadyStateSolution {
    solve_model(n, p, DephasingSpec::new(g).unwrap()).unwrap()
}

fn product_state(n: usize, mb: f64) -> nalgebra::DMatrix<xxness::twoqubit::C64> {
    let dim = 1usize << n;
    nalgebra::DMatrix::from_fn(dim, dim, |s, t| {
        if s != t {
            return 0.0.into();
        }
        let downs = s.count_ones() as i32;
        let w = ((1.0 + mb) / 2.0).powi(n as i32 - downs) * ((1.0 - mb) / 2.0).powi(downs);
        w.into()
    })
}

fn max_diff(a: &nalgebra::DMatrix<xxness::twoqubit::C64>, b: &nalgebra::DMatrix<xxness::twoqubit::C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn unbiased_two_site_chain_is_maximally_mixed() {
    let s = solve(2, params(1.0, 1.0, 0.0, 0.0), 0.0);
    assert!(max_diff(&s.rho, &product_state(2, 0.0)) < 1e-12);
    assert_eq!(s.nullity, 1);
}

#[test]
fn equilibrium_gives_product_states() {
    for (n, g, mb, deph) in [
        (3, 1.0, 0.3, 0.0),
        (4, 0.4, -0.7, 0.1),
        (5, 2.5, 0.5, 0.3),
        (6, 1.0, 0.2, 0.05),
    ] {
        let s = solve(n, params(g, g * 1.3, 0.0, mb), deph);
        assert!(max_diff(&s.rho, &product_state(n, mb)) < 1e-10, "n={n}");
        assert!(s.residual <= 1e-10);
    }
}

#[test]
fn central_pair_matches_bulk_formula() {
    let p = params(1.0, 1.0, 2.0, 0.0);
    let s = solve(4, p, 0.0);
    let r = partial_trace_pair(&s, 2, 3).unwrap();
    assert!(r.max_abs_diff(&bulk_rdm(&p).unwrap()) < 1e-8);
    assert!((bond_current(&s, 2).unwrap() - 0.5).abs() < 1e-10);
}

#[test]
fn asymmetric_expectations_match() {
    let p = params(2.0, 0.5, 1.0, 0.2);
    let s = solve(5, p, 0.0);
    let e = ness_expectations(&p).unwrap();
    for j in 1..=5 {
        assert!(
            (site_magnetization(&s, j).unwrap() - e.site_z(5, j)).abs() < 1e-8,
            "site {j}"
        );
    }
    for j in 1..5 {
        assert!((bond_current(&s, j).unwrap() - e.t).abs() < 1e-8, "bond {j}");
    }
}

#[test]
fn boundary_pair_matches_displayed_matrix() {
    let p = DrivingParams::from_square_symmetric(2.0, SquareCoords { c: 1.0, d: 1.0 }).unwrap();
    let s = solve(4, p, 0.0);
    let left = partial_trace_pair(&s, 1, 2).unwrap();
    assert!(left.max_abs_diff(&boundary_rdm(&p).unwrap()) < 1e-8);
    let right = partial_trace_pair(&s, 3, 4).unwrap();
    assert!(right.max_abs_diff(&right_boundary_rdm(&p).unwrap()) < 1e-8);
}

#[test]
fn every_bond_matches_closed_form_for_all_lengths() {
    let p = params(0.6, 1.7, -0.9, 0.15);
    for n in 2..=6 {
        let s = solve(n, p, 0.0);
        for j in 1..n {
            let r = partial_trace_pair(&s, j, j + 1).unwrap();
            assert!(r.max_abs_diff(&nn_pair_rdm(&p, n, j).unwrap()) < 1e-9, "n={n} j={j}");
        }
    }
}

#[test]
fn energy_density_vanishes() {
    for g in [0.0, 0.2] {
        let s = solve(5, params(1.3, 0.7, 1.1, -0.2), g);
        for j in 1..5 {
            assert!(bond_energy(&s, j).unwrap().abs() < 1e-10);
        }
    }
}

#[test]
fn product_state_partial_trace_factorizes() {
    let s = solve(4, params(1.0, 1.0, 0.0, 0.4), 0.0);
    let z = TwoQubitState::spin_z(0.4);
    let want = TwoQubitState::product(&z, &z);
    assert!(partial_trace_pair(&s, 1, 3).unwrap().max_abs_diff(&want) < 1e-12);
    assert!((site_magnetization(&s, 2).unwrap() - 0.4).abs() < 1e-12);
}

#[test]
fn pair_index_errors() {
    let s = solve(3, params(1.0, 1.0, 0.5, 0.0), 0.0);
    assert!(matches!(partial_trace_pair(&s, 2, 2), Err(Error::SiteIndex { .. })));
    assert!(matches!(partial_trace_pair(&s, 0, 2), Err(Error::SiteIndex { .. })));
    assert!(matches!(partial_trace_pair(&s, 2, 4), Err(Error::SiteIndex { .. })));
}

#[test]
fn solvers_agree() {
    let p = params(1.4, 0.8, 1.2, 0.1);
    let l = build_liouvillian(ChainSpec::new(5).unwrap(), p, DephasingSpec::new(0.07).unwrap()).unwrap();
    let sols: Vec<_> = [SolveMethod::Dense, SolveMethod::Sparse, SolveMethod::ShiftInvert]
        .into_iter()
        .map(|method| {
            steady_state_with(
                &l,
                &SolveOptions {
                    method,
                    ..Default::default()
                },
            )
            .unwrap()
        })
        .collect();
    assert!(max_diff(&sols[0].rho, &sols[1].rho) < 1e-10);
    assert!(max_diff(&sols[0].rho, &sols[2].rho) < 1e-10);
    assert!(sols.iter().all(|s| s.nullity == 1));
}

#[test]
fn other_sectors_have_no_steady_state() {
    let m = Model {
        chain: ChainSpec::new(3).unwrap(),
        params: params(0.9, 1.1, 0.7, -0.1),
        dephasing: DephasingSpec::new(0.1).unwrap(),
    };
    for q in [-2, -1, 1, 2] {
        let l = Liouvillian::new(m, DEFAULT_N_MAX, q).unwrap();
        let sv = l.to_dense().svd(false, false).singular_values;
        assert!(sv.min() > 1e-3, "q={q}: {}", sv.min());
    }
}

#[test]
fn no_next_nearest_neighbour_entanglement() {
    let s = solve(6, params(1.7, 0.9, 1.3, 0.2), 0.0);
    for (j, k) in [(1, 3), (2, 4), (1, 6), (3, 5)] {
        let l = partial_trace_pair(&s, j, k).unwrap().lambda_min_pt();
        assert!(l >= -1e-10, "({j},{k}): {l}");
    }
}

#[test]
fn six_site_gamma_c_matches_closed_form() {
    let p = DrivingParams::from_square_symmetric(1.0, SquareCoords { c: 1.0, d: 1.0 }).unwrap();
    let (j, k) = central_pair(6);
    let lam = |g: f64| -> xxness::Result<f64> {
        let s = solve_model(6, p, DephasingSpec::new(g)?)?;
        Ok(partial_trace_pair(&s, j, k)?.lambda_min_pt())
    };
    let (a, b) = bisect_sign(lam, 0.0, 0.3, 1e-6).unwrap();
    let gc = 0.5 * (a + b);
    assert!((gc - dephasing_gamma_c(1.0, 6).unwrap()).abs() < 1e-5, "{gc}");
    assert!(bulk_lambda_min(&p).unwrap() < 0.0);
}

#[test]
fn seven_sites_with_sparse_path() {
    let s = solve(7, params(1.0, 1.0, 2.0, 0.0), 0.05);
    assert_eq!(s.method, SolveMethod::Sparse);
    assert!(s.residual <= 1e-10 && s.nullity == 1);
    let t: Vec<f64> = (1..7).map(|j| bond_current(&s, j).unwrap()).collect();
    let spread = t.iter().cloned().fold(f64::MIN, f64::max) - t.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread <= 1e-10);
}

#[test]
fn size_limit_is_reported() {
    let r = solve_model(8, params(1.0, 1.0, 0.0, 0.0), DephasingSpec::NONE);
    assert!(matches!(r, Err(Error::SizeLimit { n: 8, .. })));
}

fn valid_params() -> impl Strategy<Value = DrivingParams> {
    (-1.0..=1.0f64, -1.0..=1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(c, d, lgl, lgr)| {
        DrivingParams::with_driving(
            10f64.powf(lgl),
            10f64.powf(lgr),
            from_square(SquareCoords { c, d }).unwrap(),
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_preserved_and_unique(p in valid_params(), n in 2usize..=5, g in 0.0..0.3f64) {
        let l = build_liouvillian(ChainSpec::new(n).unwrap(), p, DephasingSpec::new(g).unwrap()).unwrap();
        prop_assert!(l.trace_defect() <= 1e-10);
        let s = steady_state(&l).unwrap();
        prop_assert!(s.residual <= 1e-10);
        prop_assert_eq!(s.nullity, 1);
        prop_assert!(s.min_eigenvalue >= -1e-10);
    }

    #[test]
    fn current_is_homogeneous(p in valid_params(), n in 3usize..=5, g in 0.0..0.3f64) {
        let s = solve(n, p, g);
        let t: Vec<f64> = (1..n).map(|j| bond_current(&s, j).unwrap()).collect();
        for x in &t {
            prop_assert!((x - t[0]).abs() <= 1e-10);
        }
    }

    #[test]
    fn mirror_relabels_the_steady_state(p in valid_params(), n in 2usize..=5, g in 0.0..0.3f64) {
        let a = solve(n, p, g);
        let b = solve(n, p.mirrored(), g);
        let rev = |s: usize| (0..n).fold(0usize, |acc, i| acc | (((s >> i) & 1) << (n - 1 - i)));
        let dim = 1usize << n;
        for s in 0..dim {
            for t in 0..dim {
                prop_assert!((a.rho[(s, t)] - b.rho[(rev(s), rev(t))]).norm() <= 1e-10);
            }
        }
    }
}
