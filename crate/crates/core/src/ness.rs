//! Closed-form results for the nonequilibrium steady state of the XX chain
//! without dephasing, plus the two closed-form dephasing thresholds.
//!
//! Without dephasing the nearest-neighbour reduced density matrices are
//! independent of the chain length. With dephasing only the critical rate and
//! the coupling window are available in closed form; everything else comes
//! from [`crate::oracle`].
//!
//! The displayed boundary matrix in the literature is written with the right
//! spin as the leading tensor factor. In this crate's left-leading basis the
//! same state has its two middle diagonal entries exchanged and the coherence
//! `ρ[|↑↓⟩,|↓↑⟩] = −2it/4`.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{DrivingParams, SquareCoords};
use crate::twoqubit::{rdm_from_expectations, Mat4, PauliExpectations, TwoQubitState, C64};

/// Edge tolerance when checking `c` against a region's `c_min`.
const EDGE_TOL: f64 = 1e-12;

/// Steady-state observables that determine every nearest-neighbour RDM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NessExpectations {
    /// Spin current `t = −⟨σˣ_j σʸ_{j+1}⟩`, identical on every bond.
    pub t: f64,
    /// `⟨σᶻ_1⟩`.
    pub a1: f64,
    /// `⟨σᶻ_j⟩` for `1 < j < n`.
    pub a: f64,
    /// `⟨σᶻ_n⟩`.
    pub an: f64,
}

impl NessExpectations {
    /// `⟨σᶻ_j⟩` on a chain of `n` sites (1-based `j`).
    pub fn site_z(&self, n: usize, j: usize) -> f64 {
        if j == 1 {
            self.a1
        } else if j == n {
            self.an
        } else {
            self.a
        }
    }

    /// `⟨σᶻ_j σᶻ_k⟩ = a_j a_k − t² δ_{j+1,k}` for `j < k`.
    pub fn zz(&self, n: usize, j: usize, k: usize) -> f64 {
        let base = self.site_z(n, j) * self.site_z(n, k);
        if k == j + 1 {
            base - self.t * self.t
        } else {
            base
        }
    }
}

/// Steady-state expectations for arbitrary couplings.
pub fn ness_expectations(p: &DrivingParams) -> Result<NessExpectations> {
    let p = checked(p)?;
    let (gl, gr) = (p.gamma_left, p.gamma_right);
    let prod = gl * gr;
    let sum = gl + gr;
    let den = (1.0 + prod) * sum;
    let h = p.mu / 2.0;
    Ok(NessExpectations {
        t: p.mu * (prod / den),
        a1: p.mu_bar - h * (((gl - gr) + prod * sum) / den),
        a: p.mu_bar - h * (((gl - gr) * (1.0 - prod)) / den),
        an: p.mu_bar - h * (((gl - gr) - prod * sum) / den),
    })
}

fn checked(p: &DrivingParams) -> Result<DrivingParams> {
    DrivingParams::new(p.gamma_left, p.gamma_right, p.mu, p.mu_bar)
}

/// `⟨σᶻ_n⟩ − ⟨σᶻ_1⟩` halved; equals `Γ t` for equal couplings.
pub fn u_coordinate(p: &DrivingParams) -> Result<f64> {
    let e = ness_expectations(p)?;
    Ok((e.an - e.a1) / 2.0)
}

fn pair_from(e: &NessExpectations, z_left: f64, z_right: f64) -> TwoQubitState {
    rdm_from_expectations(&PauliExpectations {
        z_left,
        z_right,
        xx: 0.0,
        yy: 0.0,
        zz: z_left * z_right - e.t * e.t,
        xy: -e.t,
    })
}

/// Reduced density matrix of spins (1, 2).
pub fn boundary_rdm(p: &DrivingParams) -> Result<TwoQubitState> {
    let e = ness_expectations(p)?;
    let (a, a1, t) = (e.a, e.a1, e.t);
    let x = 1.0 + a + a1 + a * a1 - t * t;
    let y = 1.0 + a - a1 - a * a1 + t * t;
    let z = 1.0 - a + a1 - a * a1 + t * t;
    let v = 1.0 - a - a1 + a * a1 - t * t;
    let mut m = Mat4::zeros();
    m[(0, 0)] = C64::new(x / 4.0, 0.0);
    // |↑₁↓₂⟩ then |↓₁↑₂⟩
    m[(1, 1)] = C64::new(z / 4.0, 0.0);
    m[(2, 2)] = C64::new(y / 4.0, 0.0);
    m[(3, 3)] = C64::new(v / 4.0, 0.0);
    m[(1, 2)] = C64::new(0.0, -2.0 * t / 4.0);
    m[(2, 1)] = C64::new(0.0, 2.0 * t / 4.0);
    Ok(TwoQubitState::from_matrix_unchecked(m))
}

/// Reduced density matrix of spins (n−1, n), from the mirror image of the
/// left boundary.
pub fn right_boundary_rdm(p: &DrivingParams) -> Result<TwoQubitState> {
    Ok(boundary_rdm(&p.mirrored())?.swapped())
}

/// `λ_min` of the partially transposed boundary pair.
///
/// The outer block gives `¼(1 + a a₁ − t² − √((a + a₁)² + 4t²))`, which is
/// the minimum for equal couplings. With very unequal couplings a diagonal
/// entry of the inner block can lie lower, so both are checked.
pub fn boundary_lambda_min(p: &DrivingParams) -> Result<f64> {
    let e = ness_expectations(p)?;
    Ok(boundary_lambda_from(&e))
}

pub fn boundary_lambda_from(e: &NessExpectations) -> f64 {
    let (a, a1, t) = (e.a, e.a1, e.t);
    let outer = 0.25 * (1.0 + a * a1 - t * t - ((a + a1).powi(2) + 4.0 * t * t).sqrt());
    let y = 0.25 * (1.0 + a - a1 - a * a1 + t * t);
    let z = 0.25 * (1.0 - a + a1 - a * a1 + t * t);
    outer.min(y).min(z)
}

/// Reduced density matrix of a bulk pair (j, j+1) with `1 < j < n−1`.
pub fn bulk_rdm(p: &DrivingParams) -> Result<TwoQubitState> {
    let e = ness_expectations(p)?;
    let (a, t) = (e.a, e.t);
    let ap = (1.0 + a).powi(2) - t * t;
    let am = (1.0 - a).powi(2) - t * t;
    let b = 1.0 - a * a + t * t;
    let mut m = Mat4::zeros();
    m[(0, 0)] = C64::new(ap / 4.0, 0.0);
    m[(1, 1)] = C64::new(b / 4.0, 0.0);
    m[(2, 2)] = C64::new(b / 4.0, 0.0);
    m[(3, 3)] = C64::new(am / 4.0, 0.0);
    m[(1, 2)] = C64::new(0.0, -2.0 * t / 4.0);
    m[(2, 1)] = C64::new(0.0, 2.0 * t / 4.0);
    Ok(TwoQubitState::from_matrix_unchecked(m))
}

/// `¼(1 + a² − t² − 2√(a² + t²))`.
pub fn bulk_lambda_min(p: &DrivingParams) -> Result<f64> {
    Ok(bulk_lambda_from(&ness_expectations(p)?))
}

pub fn bulk_lambda_from(e: &NessExpectations) -> f64 {
    let (a, t) = (e.a, e.t);
    0.25 * (1.0 + a * a - t * t - 2.0 * (a * a + t * t).sqrt())
}

/// Nearest-neighbour pair (j, j+1) of an `n`-site chain, 1-based.
///
/// Uses the single rule `⟨σᶻ_jσᶻ_{j+1}⟩ = a_j a_{j+1} − t²`, so it also covers
/// `n = 2` where both spins touch a bath.
pub fn nn_pair_rdm(p: &DrivingParams, n: usize, j: usize) -> Result<TwoQubitState> {
    if n < 2 || j == 0 || j >= n {
        return Err(Error::SiteIndex { j, k: j + 1, n });
    }
    let e = ness_expectations(p)?;
    Ok(pair_from(&e, e.site_z(n, j), e.site_z(n, j + 1)))
}

/// `2|t| + μ̄² − 1`; a positive value would be required for entanglement of
/// spins that are not nearest neighbours.
pub fn non_nn_entanglement_margin(p: &DrivingParams) -> Result<f64> {
    let e = ness_expectations(p)?;
    Ok(2.0 * e.t.abs() + p.mu_bar * p.mu_bar - 1.0)
}

// Region boundaries. From here on the couplings are equal, Γ_L = Γ_R = Γ.

/// Which pair's entangled region a boundary curve delimits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    BoundaryTongue,
    BulkPocket,
}

impl RegionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionKind::BoundaryTongue => "boundary-tongue",
            RegionKind::BulkPocket => "bulk-pocket",
        }
    }
}

/// Lower edge `d(c)` of the entangled region near the corner `c = d = 1`.
/// The region near `(−1, −1)` is its point reflection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionBoundary {
    pub kind: RegionKind,
    pub gamma: f64,
    pub curve: Vec<SquareCoords>,
    pub c_min: f64,
}

/// Left end of the boundary-pair tongue on the edge `d = 1`; values above 1
/// mean no tongue.
pub fn boundary_tongue_cmin(gamma: f64) -> f64 {
    let g2 = gamma * gamma;
    let g4 = g2 * g2;
    let num = 3.0 + 8.0 * g2 + 4.0 * g4 - 2.0 * gamma * (1.0 + g2) * (8.0 + g2).sqrt();
    num / (1.0 + 2.0 * g2 * (1.0 + g2))
}

/// Bottom edge `d(c, Γ)` of the boundary-pair tongue for
/// `c_min(Γ) ≤ c ≤ 1`.
pub fn boundary_tongue_edge(c: f64, gamma: f64) -> Result<f64> {
    let cmin = boundary_tongue_cmin(gamma);
    if !(gamma > 0.0) || c < cmin - EDGE_TOL || c > 1.0 + EDGE_TOL {
        return Err(Error::OutOfRange {
            name: "c",
            value: c,
            range: format!("[{cmin}, 1] for gamma = {gamma}"),
        });
    }
    let g2 = gamma * gamma;
    let g4 = g2 * g2;
    let g6 = g4 * g2;
    let w = gamma * (1.0 + g2) * (8.0 + g2).sqrt();
    let v = (1.0 + g2)
        * ((9.0 + 5.0 * c * c) * g4 + (1.0 + c * c) * g6
            - 4.0 * (-1.0 + c * w)
            - 2.0 * g2 * (-6.0 - 2.0 * c * c + c * w));
    if v < 0.0 {
        return Err(Error::NegativeDiscriminant { value: v });
    }
    Ok(1.0 - (1.0 + w - c * (1.0 + 3.0 * g2 + g4) - v.sqrt()))
}

/// Smallest coupling with an entangled boundary pair.
pub fn gamma_min_boundary() -> f64 {
    let r = 78f64.sqrt();
    ((-3.0 + (27.0 - 3.0 * r).cbrt() + (27.0 + 3.0 * r).cbrt()) / 6.0).sqrt()
}

/// Left end of the bulk pocket on the edge `d = 1`.
pub fn bulk_pocket_cmin(gamma: f64) -> f64 {
    let g2 = gamma * gamma;
    3.0 - 4.0 * gamma * (SQRT_2 + gamma * (-1.0 + gamma * SQRT_2)) / (1.0 + g2 + g2 * g2)
}

/// Lower edge `d(c, Γ)` of the bulk pocket for `c_min(Γ) ≤ c ≤ 1`.
pub fn bulk_pocket_edge(c: f64, gamma: f64) -> Result<f64> {
    let cmin = bulk_pocket_cmin(gamma);
    if !(gamma > 0.0) || c < cmin - EDGE_TOL || c > 1.0 + EDGE_TOL {
        return Err(Error::OutOfRange {
            name: "c",
            value: c,
            range: format!("[{cmin}, 1] for gamma = {gamma}"),
        });
    }
    let g2 = gamma * gamma;
    let g4 = g2 * g2;
    let disc = 1.0 + gamma * (3.0 * gamma + c * c * gamma + gamma * g2 - 8f64.sqrt() * c * (1.0 + g2));
    if disc < 0.0 {
        return Err(Error::NegativeDiscriminant { value: disc });
    }
    Ok((c * (1.0 + 3.0 * g2 + g4) + 2.0 * (1.0 + g2) * (-gamma * SQRT_2 + disc.sqrt())) / (1.0 + g2 + g4))
}

/// Couplings `(Γ₋, Γ₊)` between which bulk pairs can be entangled; the
/// roots of `bulk_pocket_cmin(Γ) = 1`.
pub fn bulk_coupling_window() -> (f64, f64) {
    let w = 1.0 + SQRT_2;
    let r = (2.0 * SQRT_2 - 1.0).sqrt();
    (0.5 * (w - r), 0.5 * (w + r))
}

/// Dephasing rate above which the central pair of an `n`-site chain is never
/// entangled. Negative values mean no entanglement at any rate.
pub fn dephasing_gamma_c(gamma: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::OutOfRange {
            name: "n",
            value: n as f64,
            range: ">= 3".into(),
        });
    }
    if !(gamma > 0.0) {
        return Err(Error::OutOfRange {
            name: "gamma",
            value: gamma,
            range: "> 0".into(),
        });
    }
    Ok((SQRT_2 + 1.0 - gamma - 1.0 / gamma) / (n as f64 - 2.0))
}

/// Coupling window `(Γ₋, Γ₊)` for central-pair entanglement at dephasing
/// `gamma_deph` on `n` sites. `Γ₋ Γ₊ = 1`.
pub fn dephasing_coupling_window(gamma_deph: f64, n: usize) -> Result<(f64, f64)> {
    if n < 3 {
        return Err(Error::OutOfRange {
            name: "n",
            value: n as f64,
            range: ">= 3".into(),
        });
    }
    if !(gamma_deph >= 0.0) {
        return Err(Error::OutOfRange {
            name: "gamma_dephasing",
            value: gamma_deph,
            range: ">= 0".into(),
        });
    }
    let s = 1.0 + SQRT_2 - gamma_deph * (n as f64 - 2.0);
    let mut disc = s * s - 4.0;
    if s < 0.0 || disc < -1e-12 {
        return Err(Error::EmptyWindow { discriminant: disc });
    }
    disc = disc.max(0.0);
    Ok((0.5 * (s - disc.sqrt()), 0.5 * (s + disc.sqrt())))
}

fn sample_edge(
    kind: RegionKind,
    gamma: f64,
    cmin: f64,
    samples: usize,
    edge: impl Fn(f64, f64) -> Result<f64>,
) -> Result<RegionBoundary> {
    if cmin > 1.0 {
        return Ok(RegionBoundary {
            kind,
            gamma,
            curve: Vec::new(),
            c_min: cmin,
        });
    }
    let samples = samples.max(2);
    let curve = (0..samples)
        .map(|i| {
            let c = if i + 1 == samples {
                1.0
            } else {
                cmin + (1.0 - cmin) * i as f64 / (samples - 1) as f64
            };
            edge(c, gamma).map(|d| SquareCoords { c, d })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionBoundary {
        kind,
        gamma,
        curve,
        c_min: cmin,
    })
}

/// Samples the tongue edge at `samples` values of `c`; empty if no tongue.
pub fn tongue_boundary(gamma: f64, samples: usize) -> Result<RegionBoundary> {
    sample_edge(
        RegionKind::BoundaryTongue,
        gamma,
        boundary_tongue_cmin(gamma),
        samples,
        boundary_tongue_edge,
    )
}

/// Samples the pocket edge at `samples` values of `c`; empty if no pocket.
pub fn pocket_boundary(gamma: f64, samples: usize) -> Result<RegionBoundary> {
    sample_edge(
        RegionKind::BulkPocket,
        gamma,
        bulk_pocket_cmin(gamma),
        samples,
        bulk_pocket_edge,
    )
}
