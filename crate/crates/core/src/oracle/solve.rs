use faer::linalg::solvers::Solve;
use faer::Mat;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::liouvillian::{sparse_from, Liouvillian};
use crate::error::{Error, Result};
use crate::twoqubit::C64;

/// Sector dimension up to which the dense path is used by default
/// (`n ≤ 4`). Beyond that the dense SVD costs more than the sparse solve.
pub const DENSE_LIMIT: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    /// Dense for small sectors, sparse LU otherwise.
    Auto,
    /// Dense LU on the bordered system, nullity from a full SVD.
    Dense,
    /// Sparse LU on the bordered system.
    Sparse,
    /// Inverse iteration with a small shift; used as a cross-check.
    ShiftInvert,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub method: SolveMethod,
    /// Largest accepted `‖L(ρ)‖₂`.
    pub residual_tol: f64,
    /// Most negative eigenvalue of `ρ` still accepted.
    pub psd_tol: f64,
    /// Ratio between the two smallest singular values above which the
    /// null space counts as one-dimensional.
    pub gap_ratio: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: SolveMethod::Auto,
            residual_tol: 1e-10,
            psd_tol: 1e-10,
            gap_ratio: 1e6,
        }
    }
}

/// Steady state of a Liouvillian.
#[derive(Debug, Clone)]
pub struct SteadyStateSolution {
    pub n: usize,
    /// Full `2ⁿ × 2ⁿ` density matrix, site 1 as the leading factor.
    pub rho: DMatrix<C64>,
    /// `‖L(ρ)‖₂` after symmetrization.
    pub residual: f64,
    /// Estimated dimension of the null space.
    pub nullity: usize,
    /// `max |ρ − ρ†| / 2` removed by symmetrization.
    pub hermiticity_adjustment: f64,
    /// Ratio of the second-smallest to the smallest singular value; not
    /// computed by [`SolveMethod::ShiftInvert`].
    pub gap_ratio: Option<f64>,
    pub min_eigenvalue: f64,
    pub method: SolveMethod,
}

/// Steady state with default options.
pub fn steady_state(l: &Liouvillian) -> Result<SteadyStateSolution> {
    steady_state_with(l, &SolveOptions::default())
}

pub fn steady_state_with(l: &Liouvillian, opts: &SolveOptions) -> Result<SteadyStateSolution> {
    if l.sector() != 0 {
        return Err(Error::NoConvergence("steady states live in the q = 0 sector".into()));
    }
    let method = match opts.method {
        SolveMethod::Auto if l.dimension() <= DENSE_LIMIT => SolveMethod::Dense,
        SolveMethod::Auto => SolveMethod::Sparse,
        m => m,
    };
    let from_gap = |(x, s1, s2): (Vec<C64>, f64, f64)| {
        let gap = s2 / s1.max(f64::MIN_POSITIVE);
        (x, Some(gap), if gap > opts.gap_ratio { 1 } else { 2 })
    };
    let (x, gap, nullity) = match method {
        SolveMethod::Dense => from_gap(dense(l)?),
        SolveMethod::Sparse => from_gap(sparse(l)?),
        SolveMethod::ShiftInvert => shift_invert(l)?,
        SolveMethod::Auto => unreachable!(),
    };
    if nullity > 1 {
        return Err(Error::DegenerateSteadyState { nullity });
    }
    finish(l, x, opts, method, nullity, gap)
}

fn finish(
    l: &Liouvillian,
    x: Vec<C64>,
    opts: &SolveOptions,
    method: SolveMethod,
    nullity: usize,
    gap: Option<f64>,
) -> Result<SteadyStateSolution> {
    let x = trace_normalized(l, x);
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NoConvergence("steady-state candidate has zero trace".into()));
    }

    let n = l.n();
    let dim = 1usize << n;
    let mut rho = DMatrix::<C64>::zeros(dim, dim);
    for (&(s, t), v) in l.basis().iter().zip(&x) {
        rho[(s as usize, t as usize)] = *v;
    }
    let herm = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let adjustment = (&rho - &herm).iter().map(|z| z.norm()).fold(0.0, f64::max);
    log::debug!("steady state n={n}: symmetrization adjusted entries by {adjustment:.3e}");
    let rho = herm;

    let xs: Vec<C64> = l.basis().iter().map(|&(s, t)| rho[(s as usize, t as usize)]).collect();
    let residual = l.apply(&xs).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(residual <= opts.residual_tol) {
        return Err(Error::NoConvergence(format!(
            "residual {residual:.3e} exceeds {:.1e}",
            opts.residual_tol
        )));
    }

    let min_eigenvalue = min_eigenvalue_by_block(&rho, n);
    if min_eigenvalue < -opts.psd_tol {
        return Err(Error::NotPsd { min_eigenvalue });
    }
    Ok(SteadyStateSolution {
        n,
        rho,
        residual,
        nullity,
        hermiticity_adjustment: adjustment,
        gap_ratio: gap,
        min_eigenvalue,
        method,
    })
}

/// Smallest eigenvalue of a density matrix that commutes with the total
/// magnetization, computed block by block.
pub fn min_eigenvalue_by_block(rho: &DMatrix<C64>, n: usize) -> f64 {
    let dim = 1usize << n;
    (0..=n as u32)
        .map(|k| {
            let states: Vec<usize> = (0..dim).filter(|s| s.count_ones() == k).collect();
            let block = DMatrix::from_fn(states.len(), states.len(), |i, j| rho[(states[i], states[j])]);
            SymmetricEigen::new(block).eigenvalues.min()
        })
        .fold(f64::INFINITY, f64::min)
}

fn rhs(l: &Liouvillian, pivot: usize) -> Vec<C64> {
    let mut b = vec![C64::new(0.0, 0.0); l.dimension()];
    b[pivot] = C64::new(1.0, 0.0);
    b
}

fn dense(l: &Liouvillian) -> Result<(Vec<C64>, f64, f64)> {
    let (pivot, triplets) = l.bordered_triplets();
    let d = l.dimension();
    let mut a = DMatrix::<C64>::zeros(d, d);
    for t in &triplets {
        a[(t.row, t.col)] += t.val;
    }
    let b = DVector::from_vec(rhs(l, pivot));
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::NoConvergence("bordered system is singular".into()))?;
    let mut sv: Vec<f64> = l.to_dense().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    Ok((
        x.iter().copied().collect(),
        sv[0],
        sv.get(1).copied().unwrap_or(f64::INFINITY),
    ))
}

fn col(v: &[C64]) -> Mat<C64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn uncol(m: &Mat<C64>) -> Vec<C64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn sparse(l: &Liouvillian) -> Result<(Vec<C64>, f64, f64)> {
    let (pivot, triplets) = l.bordered_triplets();
    let a = sparse_from(l.dimension(), &triplets)?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::NoConvergence(format!("sparse LU failed: {e:?}")))?;
    let x = uncol(&lu.solve(col(&rhs(l, pivot))));
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NoConvergence("bordered system is singular".into()));
    }
    // σ_min of the bordered matrix by inverse iteration on AᴴA stands in for
    // the second singular value of L; the first is bounded by ‖L x‖/‖x‖.
    let mut v: Vec<C64> = (0..l.dimension())
        .map(|i| C64::new(1.0 + (i % 7) as f64 * 0.1, 0.0))
        .collect();
    let mut sigma = f64::INFINITY;
    for _ in 0..30 {
        let nv = norm(&v);
        v.iter_mut().for_each(|z| *z /= nv);
        let w = uncol(&lu.solve(lu.solve_adjoint(col(&v))));
        let next = 1.0 / norm(&w).sqrt();
        v = w;
        let done = (next - sigma).abs() <= 1e-6 * next;
        sigma = next;
        if done {
            break;
        }
    }
    let s1 = norm(&l.apply(&x)) / norm(&x);
    Ok((x, s1, sigma))
}

fn shift_invert(l: &Liouvillian) -> Result<(Vec<C64>, Option<f64>, usize)> {
    let scale = l.max_abs().max(1.0);
    let m = l.shifted_sparse(1e-8 * scale)?;
    let lu = m
        .sp_lu()
        .map_err(|e| Error::NoConvergence(format!("sparse LU failed: {e:?}")))?;
    let d = l.dimension() as f64;
    let iterate = |weight: &dyn Fn(u32) -> f64| -> Result<Vec<C64>> {
        let mut x: Vec<C64> = l
            .basis()
            .iter()
            .map(|&(s, t)| C64::new(if s == t { weight(s) } else { 0.0 }, 0.0))
            .collect();
        for _ in 0..50 {
            let nx = norm(&x);
            x.iter_mut().for_each(|z| *z /= nx);
            x = uncol(&lu.solve(col(&x)));
            if !norm(&x).is_finite() {
                return Err(Error::NoConvergence("shift-invert iteration diverged".into()));
            }
            if norm(&l.apply(&x)) / norm(&x) <= 1e-13 * scale {
                break;
            }
        }
        Ok(trace_normalized(l, x))
    };
    let a = iterate(&|_| 1.0)?;
    let b = iterate(&|s| 1.0 + s as f64 / d)?;
    // A degenerate null space lets different starts settle on different
    // states.
    let spread = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let nullity = if spread <= 1e-8 { 1 } else { 2 };
    Ok((a, None, nullity))
}

fn trace_normalized(l: &Liouvillian, mut x: Vec<C64>) -> Vec<C64> {
    let trace: C64 = l
        .basis()
        .iter()
        .zip(&x)
        .filter(|((s, t), _)| s == t)
        .map(|(_, v)| *v)
        .sum();
    for v in &mut x {
        *v /= trace;
    }
    x
}
