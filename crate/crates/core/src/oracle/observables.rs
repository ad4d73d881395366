use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::liouvillian::site_bit;
use super::solve::SteadyStateSolution;
use crate::error::{Error, Result};
use crate::twoqubit::{Mat4, TwoQubitState, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Product of single-site Pauli matrices, sites 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    pub factors: Vec<(usize, Pauli)>,
}

impl PauliString {
    pub fn new(factors: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        PauliString {
            factors: factors.into_iter().collect(),
        }
    }

    pub fn single(j: usize, p: Pauli) -> Self {
        Self::new([(j, p)])
    }

    pub fn pair(j: usize, pj: Pauli, k: usize, pk: Pauli) -> Self {
        Self::new([(j, pj), (k, pk)])
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (j, p)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p:?}{j}")?;
        }
        Ok(())
    }
}

/// Parses strings such as `"X1 Y2"` or `"z3"`.
impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidGrid(format!("cannot parse Pauli string {s:?}"));
        s.split_whitespace()
            .map(|tok| {
                let mut chars = tok.chars();
                let p = match chars.next().map(|c| c.to_ascii_uppercase()) {
                    Some('X') => Pauli::X,
                    Some('Y') => Pauli::Y,
                    Some('Z') => Pauli::Z,
                    _ => return Err(bad()),
                };
                let j = chars.as_str().parse::<usize>().map_err(|_| bad())?;
                Ok((j, p))
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString::new)
    }
}

/// `tr(ρ P)`; the imaginary part is kept so callers can check it.
pub fn expectation_complex(rho: &DMatrix<C64>, n: usize, obs: &PauliString) -> Result<C64> {
    let dim = 1usize << n;
    let mut flip = 0u32;
    let mut ops = Vec::with_capacity(obs.factors.len());
    for &(j, p) in &obs.factors {
        if j == 0 || j > n {
            return Err(Error::SiteIndex { j, k: j, n });
        }
        let b = site_bit(n, j);
        if p != Pauli::Z {
            flip ^= b;
        }
        ops.push((b, p));
    }
    let mut acc = C64::new(0.0, 0.0);
    for s in 0..dim as u32 {
        // P|s⟩ = phase · |s ⊕ flip⟩, applying factors right to left.
        let mut phase = C64::new(1.0, 0.0);
        let mut cur = s;
        for &(b, p) in ops.iter().rev() {
            let down = cur & b != 0;
            match p {
                Pauli::X => cur ^= b,
                Pauli::Y => {
                    phase *= if down { C64::new(0.0, -1.0) } else { C64::new(0.0, 1.0) };
                    cur ^= b;
                }
                Pauli::Z => {
                    if down {
                        phase = -phase;
                    }
                }
            }
        }
        debug_assert_eq!(cur, s ^ flip);
        acc += phase * rho[(s as usize, cur as usize)];
    }
    Ok(acc)
}

/// `tr(ρ P)` for a Hermitian Pauli string.
pub fn expectation(sol: &SteadyStateSolution, obs: &PauliString) -> Result<f64> {
    Ok(expectation_complex(&sol.rho, sol.n, obs)?.re)
}

pub fn site_magnetization(sol: &SteadyStateSolution, j: usize) -> Result<f64> {
    expectation(sol, &PauliString::single(j, Pauli::Z))
}

/// `t = −⟨σˣ_j σʸ_{j+1}⟩` on bond `(j, j+1)`.
pub fn bond_current(sol: &SteadyStateSolution, j: usize) -> Result<f64> {
    Ok(-expectation(sol, &PauliString::pair(j, Pauli::X, j + 1, Pauli::Y))?)
}

/// `⟨σˣ_jσˣ_{j+1} + σʸ_jσʸ_{j+1}⟩`.
pub fn bond_energy(sol: &SteadyStateSolution, j: usize) -> Result<f64> {
    Ok(expectation(sol, &PauliString::pair(j, Pauli::X, j + 1, Pauli::X))?
        + expectation(sol, &PauliString::pair(j, Pauli::Y, j + 1, Pauli::Y))?)
}

/// Reduced state of spins `j < k` (1-based), spin `j` leading.
pub fn partial_trace_pair(sol: &SteadyStateSolution, j: usize, k: usize) -> Result<TwoQubitState> {
    partial_trace_matrix(&sol.rho, sol.n, j, k)
}

pub fn partial_trace_matrix(rho: &DMatrix<C64>, n: usize, j: usize, k: usize) -> Result<TwoQubitState> {
    if j == 0 || j >= k || k > n {
        return Err(Error::SiteIndex { j, k, n });
    }
    let (bj, bk) = (site_bit(n, j), site_bit(n, k));
    let rest = !(bj | bk) & ((1u32 << n) - 1);
    let local = |s: u32| 2 * usize::from(s & bj != 0) + usize::from(s & bk != 0);
    let mut m = Mat4::zeros();
    let dim = 1u32 << n;
    for s in 0..dim {
        for t in 0..dim {
            if (s ^ t) & rest == 0 {
                m[(local(s), local(t))] += rho[(s as usize, t as usize)];
            }
        }
    }
    TwoQubitState::new(m)
}

/// The middle bond of an `n`-site chain, `(⌊n/2⌋, ⌊n/2⌋ + 1)`.
pub fn central_pair(n: usize) -> (usize, usize) {
    (n / 2, n / 2 + 1)
}
