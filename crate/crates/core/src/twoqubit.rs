//! Two-qubit density matrices and the PPT entanglement test.
//!
//! Basis convention (shared by every module, including the Lindblad oracle):
//! `σᶻ|↑⟩ = +|↑⟩`, product basis ordered `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩` with the
//! lower-index ("left") spin as the leading tensor factor. Index
//! `2·b_left + b_right` with `b = 0` for spin up.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat4 = Matrix4<C64>;

/// Default threshold below which `λ_min(ρ^PT)` counts as negative.
pub const DEFAULT_ENTANGLEMENT_EPS: f64 = 1e-12;

/// Hermiticity tolerance accepted by the eigenvalue routines.
pub const HERMITIAN_TOL: f64 = 1e-10;

const STATE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;
const X_SHAPE_TOL: f64 = 1e-14;

/// Pauli-basis expectation values that fix a two-spin reduced density matrix.
///
/// `xy` is `⟨σˣ⊗σʸ⟩`; the model's states carry only the antisymmetric
/// (current-like) part, so `⟨σʸ⊗σˣ⟩ = -xy` is implied. For the driven chain
/// `xy = -t`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PauliExpectations {
    pub z_left: f64,
    pub z_right: f64,
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
}

/// Hermitian, unit-trace 4×4 matrix describing two spins.
///
/// Positivity is not enforced on construction; see [`TwoQubitState::diagnostics`].
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    m: Mat4,
}

/// Result of checking a two-spin matrix against the density-matrix axioms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateDiagnostics {
    pub hermiticity_error: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub fn is_physical(&self) -> bool {
        self.hermiticity_error <= STATE_TOL && self.trace_error <= STATE_TOL && self.min_eigenvalue >= -PSD_TOL
    }
}

impl TwoQubitState {
    /// Wraps a matrix after checking Hermiticity and unit trace.
    pub fn new(m: Mat4) -> Result<Self> {
        let herm = hermiticity_error(&m);
        if herm > STATE_TOL {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::OutOfRange {
                name: "trace",
                value: tr.re,
                range: "1 ± 1e-12".into(),
            });
        }
        Ok(TwoQubitState { m })
    }

    pub(crate) fn from_matrix_unchecked(m: Mat4) -> Self {
        TwoQubitState { m }
    }

    pub fn maximally_mixed() -> Self {
        TwoQubitState {
            m: Mat4::identity() * C64::new(0.25, 0.0),
        }
    }

    /// `ρ_A ⊗ ρ_B` for two single-spin density matrices.
    pub fn product(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Self {
        TwoQubitState { m: a.kronecker(b) }
    }

    /// Single-spin state `(𝟙 + z σᶻ)/2`.
    pub fn spin_z(z: f64) -> Matrix2<C64> {
        Matrix2::new(
            C64::new((1.0 + z) / 2.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new((1.0 - z) / 2.0, 0.0),
        )
    }

    /// `|Φ⁺⟩⟨Φ⁺|` with `|Φ⁺⟩ = (|↑↑⟩ + |↓↓⟩)/√2`.
    pub fn bell_phi_plus() -> Self {
        let mut m = Mat4::zeros();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            m[(i, j)] = C64::new(0.5, 0.0);
        }
        TwoQubitState { m }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.m[(i, j)]
    }

    /// Exchanges the two spins.
    pub fn swapped(&self) -> Self {
        let p = [0usize, 2, 1, 3];
        TwoQubitState {
            m: Mat4::from_fn(|i, j| self.m[(p[i], p[j])]),
        }
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        StateDiagnostics {
            hermiticity_error: hermiticity_error(&self.m),
            trace_error: (self.m.trace() - C64::new(1.0, 0.0)).norm(),
            min_eigenvalue: min_eigenvalue(&self.m).unwrap_or(f64::NAN),
        }
    }

    /// Largest entry-wise distance to another state.
    pub fn max_abs_diff(&self, other: &TwoQubitState) -> f64 {
        (self.m - other.m).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Pauli expectations read back from the matrix.
    pub fn expectations(&self) -> PauliExpectations {
        let m = &self.m;
        let d = |i: usize| m[(i, i)].re;
        PauliExpectations {
            z_left: d(0) + d(1) - d(2) - d(3),
            z_right: d(0) - d(1) + d(2) - d(3),
            zz: d(0) - d(1) - d(2) + d(3),
            xx: 2.0 * (m[(0, 3)].re + m[(1, 2)].re),
            yy: 2.0 * (m[(1, 2)].re - m[(0, 3)].re),
            xy: 2.0 * m[(1, 2)].im,
        }
    }

    /// `λ_min(ρ^PT)`; Hermiticity is guaranteed by construction.
    pub fn lambda_min_pt(&self) -> f64 {
        min_eigenvalue(partial_transpose(self).matrix()).expect("two-qubit state is Hermitian")
    }
}

/// Builds `¼[𝟙 + z_L σᶻ⊗𝟙 + z_R 𝟙⊗σᶻ + xx σˣσˣ + yy σʸσʸ + zz σᶻσᶻ + xy (σˣσʸ − σʸσˣ)]`.
pub fn rdm_from_expectations(e: &PauliExpectations) -> TwoQubitState {
    let r = |x: f64| C64::new(x / 4.0, 0.0);
    let mut m = Mat4::zeros();
    m[(0, 0)] = r(1.0 + e.z_left + e.z_right + e.zz);
    m[(1, 1)] = r(1.0 + e.z_left - e.z_right - e.zz);
    m[(2, 2)] = r(1.0 - e.z_left + e.z_right - e.zz);
    m[(3, 3)] = r(1.0 - e.z_left - e.z_right + e.zz);
    m[(0, 3)] = r(e.xx - e.yy);
    m[(3, 0)] = m[(0, 3)];
    m[(1, 2)] = C64::new((e.xx + e.yy) / 4.0, e.xy / 2.0);
    m[(2, 1)] = m[(1, 2)].conj();
    TwoQubitState { m }
}

/// Transpose on the second (right) spin.
pub fn partial_transpose(rho: &TwoQubitState) -> TwoQubitState {
    TwoQubitState {
        m: partial_transpose_matrix(&rho.m, false),
    }
}

/// Transpose on the first (left) spin.
pub fn partial_transpose_left(rho: &TwoQubitState) -> TwoQubitState {
    TwoQubitState {
        m: partial_transpose_matrix(&rho.m, true),
    }
}

fn partial_transpose_matrix(m: &Mat4, left: bool) -> Mat4 {
    Mat4::from_fn(|i, j| {
        let (a, b) = (i >> 1, i & 1);
        let (a2, b2) = (j >> 1, j & 1);
        if left {
            m[((a2 << 1) | b, (a << 1) | b2)]
        } else {
            m[((a << 1) | b2, (a2 << 1) | b)]
        }
    })
}

fn hermiticity_error(m: &Mat4) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// True when every entry off the diagonal and anti-diagonal vanishes.
pub fn is_x_shaped(m: &Mat4) -> bool {
    (0..4).all(|i| (0..4).all(|j| i == j || i + j == 3 || m[(i, j)].norm() <= X_SHAPE_TOL))
}

/// Eigenvalues of a Hermitian 2×2 block `[[p, q], [q̄, r]]`, ascending.
fn block_eigenvalues(p: f64, r: f64, q: C64) -> [f64; 2] {
    let mean = 0.5 * (p + r);
    let rad = (0.5 * (p - r)).hypot(q.norm());
    [mean - rad, mean + rad]
}

/// Closed-form spectrum of an X-shaped Hermitian matrix, ascending.
pub fn x_matrix_eigenvalues(m: &Mat4) -> [f64; 4] {
    let [a, b] = block_eigenvalues(m[(0, 0)].re, m[(3, 3)].re, m[(0, 3)]);
    let [c, d] = block_eigenvalues(m[(1, 1)].re, m[(2, 2)].re, m[(1, 2)]);
    let mut v = [a, b, c, d];
    v.sort_by(f64::total_cmp);
    v
}

/// Spectrum from the dense Hermitian eigensolver, ascending.
pub fn dense_eigenvalues(m: &Mat4) -> [f64; 4] {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut v = [0.0; 4];
    for (k, x) in eig.eigenvalues.iter().enumerate() {
        v[k] = *x;
    }
    v.sort_by(f64::total_cmp);
    v
}

/// Ascending eigenvalues of a Hermitian 4×4, using the X-matrix closed form
/// when the sparsity pattern allows it.
pub fn eigenvalues(m: &Mat4) -> Result<[f64; 4]> {
    let herm = hermiticity_error(m);
    if herm > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: herm });
    }
    if is_x_shaped(m) {
        Ok(x_matrix_eigenvalues(m))
    } else {
        Ok(dense_eigenvalues(m))
    }
}

/// Smallest eigenvalue of a Hermitian 4×4.
pub fn min_eigenvalue(m: &Mat4) -> Result<f64> {
    eigenvalues(m).map(|v| v[0])
}

/// Sum of the magnitudes of the negative eigenvalues of `ρ^PT`.
pub fn negativity(rho: &TwoQubitState) -> f64 {
    let ev = eigenvalues(partial_transpose(rho).matrix()).expect("two-qubit state is Hermitian");
    ev.iter().filter(|&&x| x < 0.0).map(|x| -x).sum()
}

/// PPT verdict: entangled iff `λ_min(ρ^PT) < -eps`.
pub fn is_entangled(rho: &TwoQubitState, eps: f64) -> bool {
    rho.lambda_min_pt() < -eps
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Random two-qubit density matrix `A A† / tr(A A†)`.
    fn random_state(rng: &mut ChaCha8Rng) -> TwoQubitState {
        let a = Mat4::from_fn(|_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let m = a * a.adjoint();
        let tr = m.trace();
        TwoQubitState::new(m / tr).unwrap()
    }

    fn random_x_matrix(rng: &mut ChaCha8Rng) -> Mat4 {
        let mut m = Mat4::zeros();
        for i in 0..4 {
            m[(i, i)] = c(rng.random::<f64>() * 2.0 - 1.0, 0.0);
        }
        m[(0, 3)] = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        m[(1, 2)] = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        m[(3, 0)] = m[(0, 3)].conj();
        m[(2, 1)] = m[(1, 2)].conj();
        m
    }

    #[test]
    fn zeros_give_maximally_mixed() {
        let rho = rdm_from_expectations(&PauliExpectations::default());
        assert_eq!(rho, TwoQubitState::maximally_mixed());
    }

    #[test]
    fn z_only_gives_product_state() {
        let mb = 0.3;
        let rho = rdm_from_expectations(&PauliExpectations {
            z_left: mb,
            z_right: mb,
            zz: mb * mb,
            ..Default::default()
        });
        let prod = TwoQubitState::product(&TwoQubitState::spin_z(mb), &TwoQubitState::spin_z(mb));
        assert!(rho.max_abs_diff(&prod) < 1e-15);
    }

    #[test]
    fn current_term_fills_middle_block() {
        // t = 0.5, a = 0: B = 1 - a² + t² = 1.25, block [[B, 2it], [-2it, B]]/4
        let t = 0.5;
        let rho = rdm_from_expectations(&PauliExpectations {
            zz: -t * t,
            xy: t,
            ..Default::default()
        });
        assert!((rho.get(1, 1) - c(1.25 / 4.0, 0.0)).norm() < 1e-15);
        assert!((rho.get(2, 2) - c(1.25 / 4.0, 0.0)).norm() < 1e-15);
        assert!((rho.get(1, 2) - c(0.0, 2.0 * t / 4.0)).norm() < 1e-15);
        assert!((rho.get(2, 1) - c(0.0, -2.0 * t / 4.0)).norm() < 1e-15);
        assert!((rho.get(0, 0) - c(0.75 / 4.0, 0.0)).norm() < 1e-15);
        // read-back
        let e = rho.expectations();
        assert!((e.xy - t).abs() < 1e-15 && e.xx.abs() < 1e-15 && (e.zz + 0.25).abs() < 1e-15);
    }

    #[test]
    fn pt_examples() {
        let mm = TwoQubitState::maximally_mixed();
        assert_eq!(partial_transpose(&mm), mm);

        let a = Matrix2::new(c(0.6, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.0));
        let b = Matrix2::new(c(0.7, 0.0), c(0.0, 0.3), c(0.0, -0.3), c(0.3, 0.0));
        let prod = TwoQubitState::product(&a, &b);
        let pt = partial_transpose(&prod);
        let expect = TwoQubitState::product(&a, &b.transpose());
        assert!(pt.max_abs_diff(&expect) < 1e-15);
        let e1 = dense_eigenvalues(prod.matrix());
        let e2 = dense_eigenvalues(pt.matrix());
        for k in 0..4 {
            assert!((e1[k] - e2[k]).abs() < 1e-12);
        }

        // bulk NESS form with t = 1/2, a = 0
        let rho = rdm_from_expectations(&PauliExpectations {
            zz: -0.25,
            xy: -0.5,
            ..Default::default()
        });
        assert!((rho.lambda_min_pt() + 0.0625).abs() < 1e-15);
        assert!((dense_eigenvalues(partial_transpose(&rho).matrix())[0] + 0.0625).abs() < 1e-12);
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert!((min_eigenvalue(TwoQubitState::maximally_mixed().matrix()).unwrap() - 0.25).abs() < 1e-15);
        let mut d = Mat4::zeros();
        d[(0, 0)] = c(0.7, 0.0);
        d[(1, 1)] = c(0.3, 0.0);
        assert_eq!(min_eigenvalue(&d).unwrap(), 0.0);
    }

    #[test]
    fn min_eigenvalue_rejects_non_hermitian() {
        let mut m = Mat4::identity();
        m[(0, 1)] = c(0.5, 0.0);
        assert!(matches!(min_eigenvalue(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn negativity_examples() {
        assert_eq!(negativity(&TwoQubitState::maximally_mixed()), 0.0);
        assert!((negativity(&TwoQubitState::bell_phi_plus()) - 0.5).abs() < 1e-15);
        let rho = rdm_from_expectations(&PauliExpectations {
            zz: -0.25,
            xy: -0.5,
            ..Default::default()
        });
        assert!((negativity(&rho) - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn entanglement_verdicts() {
        let prod = TwoQubitState::product(&TwoQubitState::spin_z(0.4), &TwoQubitState::spin_z(-0.2));
        assert!(!is_entangled(&prod, DEFAULT_ENTANGLEMENT_EPS));
        assert!(is_entangled(&TwoQubitState::bell_phi_plus(), DEFAULT_ENTANGLEMENT_EPS));
    }

    #[test]
    fn x_matrix_closed_form_matches_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let m = random_x_matrix(&mut rng);
            let a = x_matrix_eigenvalues(&m);
            let b = dense_eigenvalues(&m);
            for k in 0..4 {
                assert!((a[k] - b[k]).abs() < 1e-12, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn pt_bounded_below_by_minus_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let rho = random_state(&mut rng);
            assert!(rho.lambda_min_pt() >= -0.5 - 1e-12);
        }
        assert!((TwoQubitState::bell_phi_plus().lambda_min_pt() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn swap_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_state(&mut rng);
        assert_eq!(rho.swapped().swapped(), rho);
        let e = rho.expectations();
        let s = rho.swapped().expectations();
        assert!((e.z_left - s.z_right).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn pt_involution_trace_hermiticity(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_state(&mut rng);
            let pt = partial_transpose(&rho);
            prop_assert_eq!(partial_transpose(&pt), rho.clone());
            prop_assert!((pt.matrix().trace() - rho.matrix().trace()).norm() < 1e-15);
            prop_assert!(hermiticity_error(pt.matrix()) < 1e-15);
        }

        #[test]
        fn pt_side_does_not_matter(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_state(&mut rng);
            let r = min_eigenvalue(partial_transpose(&rho).matrix()).unwrap();
            let l = min_eigenvalue(partial_transpose_left(&rho).matrix()).unwrap();
            prop_assert!((r - l).abs() < 1e-12);
        }

        #[test]
        fn separable_mixtures_are_ppt(seed in any::<u64>(), k in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut acc = Mat4::zeros();
            let mut wsum = 0.0;
            for _ in 0..k {
                let w: f64 = rng.random();
                let a = random_state_2(&mut rng);
                let b = random_state_2(&mut rng);
                acc += TwoQubitState::product(&a, &b).matrix() * c(w, 0.0);
                wsum += w;
            }
            let rho = TwoQubitState::new(acc / c(wsum, 0.0)).unwrap();
            prop_assert!(rho.lambda_min_pt() >= -1e-12);
        }
    }

    fn random_state_2(rng: &mut ChaCha8Rng) -> Matrix2<C64> {
        let a = Matrix2::from_fn(|_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let m = a * a.adjoint();
        let tr = m.trace();
        m / tr
    }
}
