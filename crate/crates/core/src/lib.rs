//! Entanglement in the nonequilibrium steady state of the boundary-driven XX
//! spin chain: closed forms, an exact Lindblad solver, and region scans.

// `!(x > y)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod ness;
pub mod numerics;
pub mod oracle;
pub mod params;
pub mod scanner;
pub mod thermal;
pub mod twoqubit;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/parameters.md")]
    mod parameters {}
    #[doc = include_str!("../../../book/src/entanglement.md")]
    mod entanglement {}
    #[doc = include_str!("../../../book/src/thermal.md")]
    mod thermal {}
    #[doc = include_str!("../../../book/src/steady-state.md")]
    mod steady_state {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/scanning.md")]
    mod scanning {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
