//! Grand-canonical (thermal) baseline for nearest-neighbour entanglement in
//! the infinite XX chain.
//!
//! Expectation values are the band integrals
//!
//! ```text
//! ⟨σᶻ⟩     = (1/π) ∫₀^π tanh(φ − 2β cos k) dk
//! ⟨σˣσˣ⟩   = (1/π) ∫₀^π cos k · tanh(φ − 2β cos k) dk
//! ```
//!
//! These correspond to the weight `exp(−βH + φM)/Z`, so `⟨σᶻ⟩` grows with
//! `φ`. The entanglement verdict depends on `φ` only through `⟨σᶻ⟩²`, which
//! makes it insensitive to that sign.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::{brent, integrate};
use crate::params::GrandCanonicalParams;
use crate::twoqubit::{rdm_from_expectations, PauliExpectations, TwoQubitState};

/// Absolute accuracy of the band integrals (after the `1/π` normalisation).
pub const QUAD_TOL: f64 = 1e-10;
const QUAD_MAX_INTERVALS: usize = 2000;

/// Bracket used by [`critical_beta`].
pub const CRITICAL_BRACKET: (f64, f64) = (1e-6, 10.0);
const ROOT_TOL: f64 = 1e-10;

/// Nearest-neighbour thermal expectations; `zz = z² − xx²` holds by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalExpectations {
    pub z: f64,
    pub xx: f64,
    pub zz: f64,
}

impl ThermalExpectations {
    pub fn new(z: f64, xx: f64) -> Self {
        ThermalExpectations {
            z,
            xx,
            zz: z * z - xx * xx,
        }
    }

    /// Energy density `⟨E⟩ = 2⟨σˣσˣ⟩` per bond.
    pub fn energy(&self) -> f64 {
        2.0 * self.xx
    }
}

fn band_average<F: Fn(f64) -> f64>(f: F) -> Result<f64> {
    let q = integrate(f, 0.0, PI, QUAD_TOL * PI, QUAD_MAX_INTERVALS)?;
    Ok(q.value / PI)
}

/// `⟨σᶻ⟩_G`.
pub fn gc_magnetization(g: &GrandCanonicalParams) -> Result<f64> {
    let (beta, phi) = (g.beta, g.phi);
    band_average(|k| (phi - 2.0 * beta * k.cos()).tanh())
}

/// `⟨σˣ_j σˣ_{j+1}⟩_G` (equal to the `σʸσʸ` correlator).
pub fn gc_xx(g: &GrandCanonicalParams) -> Result<f64> {
    let (beta, phi) = (g.beta, g.phi);
    band_average(|k| k.cos() * (phi - 2.0 * beta * k.cos()).tanh())
}

pub fn thermal_expectations(g: &GrandCanonicalParams) -> Result<ThermalExpectations> {
    Ok(ThermalExpectations::new(gc_magnetization(g)?, gc_xx(g)?))
}

/// Two-spin reduced density matrix of the grand-canonical state.
pub fn gc_two_spin_rdm(g: &GrandCanonicalParams) -> Result<TwoQubitState> {
    Ok(thermal_rdm(&thermal_expectations(g)?))
}

pub fn thermal_rdm(e: &ThermalExpectations) -> TwoQubitState {
    rdm_from_expectations(&PauliExpectations {
        z_left: e.z,
        z_right: e.z,
        xx: e.xx,
        yy: e.xx,
        zz: e.zz,
        xy: 0.0,
    })
}

/// `λ_min(ρ^PT) = ¼(1 − xx² + z² − 2√(xx² + z²))`.
pub fn lambda_min_from(e: &ThermalExpectations) -> f64 {
    let w = e.xx * e.xx + e.z * e.z;
    0.25 * (1.0 - e.xx * e.xx + e.z * e.z - 2.0 * w.sqrt())
}

pub fn gc_lambda_min(g: &GrandCanonicalParams) -> Result<f64> {
    Ok(lambda_min_from(&thermal_expectations(g)?))
}

/// `(⟨σˣσˣ⟩ + √2)² − 1 − ⟨σᶻ⟩²`, positive on the separable side.
pub fn critical_condition(g: &GrandCanonicalParams) -> Result<f64> {
    let e = thermal_expectations(g)?;
    Ok((e.xx + SQRT_2).powi(2) - 1.0 - e.z * e.z)
}

/// Inverse temperature at which thermal nearest-neighbour entanglement
/// appears, for chemical-potential parameter `phi`.
pub fn critical_beta(phi: f64) -> Result<f64> {
    let (lo, hi) = CRITICAL_BRACKET;
    // Quadrature failures surface as NaN and break the bracket check.
    let f = |beta: f64| critical_condition(&GrandCanonicalParams { beta, phi }).unwrap_or(f64::NAN);
    if !(f(lo) * f(hi) <= 0.0) {
        return Err(crate::error::Error::NoRoot { lo, hi });
    }
    brent(f, lo, hi, ROOT_TOL)
}

/// Zero-temperature limit at fixed `h = φ/β` (Fermi level), in closed form:
/// returns `(⟨σᶻ⟩, ⟨σˣσˣ⟩)`.
pub fn zero_temperature_expectations(h: f64) -> ThermalExpectations {
    // occupied where h − 2 cos k > 0, i.e. k > k_F = arccos(h/2)
    let kf = (h / 2.0).clamp(-1.0, 1.0).acos();
    ThermalExpectations::new(1.0 - 2.0 * kf / PI, -2.0 * kf.sin() / PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twoqubit::{dense_eigenvalues, is_entangled, partial_transpose, DEFAULT_ENTANGLEMENT_EPS};

    fn gc(beta: f64, phi: f64) -> GrandCanonicalParams {
        GrandCanonicalParams { beta, phi }
    }

    #[test]
    fn infinite_temperature_limits() {
        assert!(gc_magnetization(&gc(0.0, 0.0)).unwrap().abs() < 1e-15);
        for phi in [-2.0, 0.3, 1.7] {
            assert!((gc_magnetization(&gc(0.0, phi)).unwrap() - f64::tanh(phi)).abs() < 1e-12);
            assert!(gc_xx(&gc(0.0, phi)).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn ground_state_correlator_limit() {
        // tanh(−2β cos k) → −sign(cos k): ⟨σˣσˣ⟩ → −(1/π)∫|cos k| = −2/π
        let xx = gc_xx(&gc(200.0, 0.0)).unwrap();
        assert!((xx + 2.0 / PI).abs() < 1e-4, "{xx}");
        assert!(xx < 0.0);
        let g0 = zero_temperature_expectations(0.0);
        assert!((g0.xx + 2.0 / PI).abs() < 1e-15 && g0.z.abs() < 1e-15);
    }

    #[test]
    fn zero_temperature_matches_large_beta() {
        for h in [-1.2, 0.4, 1.9] {
            let beta = 400.0;
            let e = thermal_expectations(&gc(beta, beta * h)).unwrap();
            let z0 = zero_temperature_expectations(h);
            assert!((e.z - z0.z).abs() < 1e-3, "{h}: {} vs {}", e.z, z0.z);
            assert!((e.xx - z0.xx).abs() < 1e-3);
        }
        let full = zero_temperature_expectations(3.0);
        assert_eq!((full.z, full.xx), (1.0, 0.0));
    }

    #[test]
    fn rdm_examples() {
        let r = gc_two_spin_rdm(&gc(0.0, 0.0)).unwrap();
        assert!(r.max_abs_diff(&TwoQubitState::maximally_mixed()) < 1e-12);

        let phi = 0.8;
        let r = gc_two_spin_rdm(&gc(0.0, phi)).unwrap();
        let s = TwoQubitState::spin_z(phi.tanh());
        assert!(r.max_abs_diff(&TwoQubitState::product(&s, &s)) < 1e-12);

        let r = gc_two_spin_rdm(&gc(1.0, 0.0)).unwrap();
        assert!(r.diagnostics().is_physical());
        assert!(is_entangled(&r, DEFAULT_ENTANGLEMENT_EPS));
    }

    #[test]
    fn lambda_examples() {
        assert!((gc_lambda_min(&gc(0.0, 0.0)).unwrap() - 0.25).abs() < 1e-12);
        let g = gc(2.0, 0.0);
        let l = gc_lambda_min(&g).unwrap();
        assert!(l < 0.0);
        let dense = dense_eigenvalues(partial_transpose(&gc_two_spin_rdm(&g).unwrap()).matrix())[0];
        assert!((l - dense).abs() < 1e-10);
    }

    #[test]
    fn closed_form_lambda_matches_eigensolver_on_grid() {
        for i in 0..20 {
            for j in 0..20 {
                let g = gc(3.0 * i as f64 / 19.0, -4.0 + 8.0 * j as f64 / 19.0);
                let e = thermal_expectations(&g).unwrap();
                assert!((e.zz - (e.z * e.z - e.xx * e.xx)).abs() < 1e-15);
                let rho = thermal_rdm(&e);
                let dense = dense_eigenvalues(partial_transpose(&rho).matrix())[0];
                assert!((lambda_min_from(&e) - dense).abs() < 1e-10, "{g:?}");
            }
        }
    }

    #[test]
    fn critical_beta_values() {
        let b0 = critical_beta(0.0).unwrap();
        assert!((b0 - 0.5162).abs() < 5e-4, "{b0}");
        assert!((1.0 / b0 - 1.94).abs() < 1e-2);
        let b4 = critical_beta(4.0).unwrap();
        assert!((b4 - 0.5146).abs() < 5e-4, "{b4}");
        assert!(gc_lambda_min(&gc(b0, 0.0)).unwrap().abs() < 1e-6);
    }

    #[test]
    fn critical_identity_holds_at_root() {
        let b = critical_beta(0.0).unwrap();
        let e = thermal_expectations(&gc(b, 0.0)).unwrap();
        assert!(((e.xx + SQRT_2).powi(2) - (1.0 + e.z * e.z)).abs() < 1e-8);
    }

    #[test]
    fn single_sign_change_at_zero_phi() {
        let bc = critical_beta(0.0).unwrap();
        let mut changes = 0;
        let mut prev = gc_lambda_min(&gc(0.0, 0.0)).unwrap();
        for i in 1..=300 {
            let beta = 3.0 * i as f64 / 300.0;
            let l = gc_lambda_min(&gc(beta, 0.0)).unwrap();
            if l.signum() != prev.signum() {
                changes += 1;
                assert!((beta - bc).abs() <= 0.01);
            }
            prev = l;
        }
        assert_eq!(changes, 1);
        assert!(gc_lambda_min(&gc(bc - 0.01, 0.0)).unwrap() > 0.0);
        assert!(gc_lambda_min(&gc(bc + 0.01, 0.0)).unwrap() < 0.0);
    }
}
