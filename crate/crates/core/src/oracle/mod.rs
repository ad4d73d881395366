//! Exact steady states of small chains from the full Lindblad generator.
//!
//! This is the reference every closed form is tested against, and the only
//! source of reduced states when dephasing is on.

mod liouvillian;
mod observables;
mod solve;

pub use liouvillian::{build_liouvillian, Liouvillian, Model, DEFAULT_N_MAX};
pub use observables::{
    bond_current, bond_energy, central_pair, expectation, expectation_complex, partial_trace_matrix,
    partial_trace_pair, site_magnetization, Pauli, PauliString,
};
pub use solve::{
    min_eigenvalue_by_block, steady_state, steady_state_with, SolveMethod, SolveOptions, SteadyStateSolution,
    DENSE_LIMIT,
};

use crate::error::Result;
use crate::params::{ChainSpec, DephasingSpec, DrivingParams};

/// Builds and solves in one step.
pub fn solve_model(n: usize, p: DrivingParams, d: DephasingSpec) -> Result<SteadyStateSolution> {
    steady_state(&build_liouvillian(ChainSpec::new(n)?, p, d)?)
}
