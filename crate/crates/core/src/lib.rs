//! Quantum iterative linear solvers simulated classically.
//!
//! Jacobi and Gauss-Seidel iterations are expanded into linear combinations
//! of block-encoded unitaries. Two backends execute them: a gate-level
//! statevector simulator (small systems, full circuit synthesis) and an
//! operator-level emulator that applies each encoded block as a matvec.
//! Classical iterations in [`iterate`] are the reference every backend is
//! checked against.

pub mod blockenc;
pub mod error;
pub mod experiments;
pub mod iterate;
pub mod lcu;
pub mod numkit;
pub mod pde;
pub mod qsim;

pub use error::{Error, Result};
