//! Finite-size trends of entanglement under dephasing, from the exact solver.

use xxness::ness::dephasing_gamma_c;
use xxness::numerics::bisect_sign;
use xxness::oracle::{central_pair, partial_trace_pair, solve_model};
use xxness::params::{DephasingSpec, DrivingParams};

const WIDTH: f64 = 1e-4;

/// `λ_min` of pair `(j, j+1)` at maximal driving `c = d = 1`.
fn lambda(n: usize, j: usize, gamma: f64, deph: f64) -> xxness::Result<f64> {
    let p = DrivingParams::symmetric(gamma, 2.0, 0.0)?;
    let sol = solve_model(n, p, DephasingSpec::new(deph)?)?;
    Ok(partial_trace_pair(&sol, j, j + 1)?.lambda_min_pt())
}

fn mid((lo, hi): (f64, f64)) -> f64 {
    0.5 * (lo + hi)
}

/// Smallest bath coupling with an entangled boundary pair.
fn gamma_m(n: usize, deph: f64) -> f64 {
    mid(bisect_sign(|g| lambda(n, 1, g, deph), 0.3, 1.0, WIDTH).unwrap())
}

/// Dephasing rate at which pair `(j, j+1)` stops being entangled.
fn gamma_c(n: usize, j: usize) -> f64 {
    mid(bisect_sign(|g| lambda(n, j, 1.0, g), 0.0, 0.5, WIDTH).unwrap())
}

#[test]
fn boundary_threshold_rises_towards_one_with_length() {
    let deph = 0.1;
    let gm: Vec<f64> = (4..=7).map(|n| gamma_m(n, deph)).collect();
    assert!(gm.windows(2).all(|w| w[1] > w[0]), "{gm:?}");
    assert!(gm.iter().all(|&g| g < 1.0), "{gm:?}");
}

#[test]
fn critical_dephasing_grows_away_from_centre() {
    for n in [6, 7] {
        let (centre, _) = central_pair(n);
        let gc: Vec<f64> = (2..centre + 1).map(|j| gamma_c(n, j)).collect();
        assert!(gc.windows(2).all(|w| w[0] > w[1]), "n={n}: {gc:?}");
        // The closed form holds for the exact middle bond of an even chain.
        let closed = dephasing_gamma_c(1.0, n).unwrap();
        assert!(
            n % 2 == 1 || (gc[gc.len() - 1] - closed).abs() < 2.0 * WIDTH,
            "n={n}: {gc:?} vs {closed}"
        );
    }
}
