//! Numerical laboratory for the additivity quantities of finite-dimensional
//! quantum channels.
//!
//! The crate computes, for dense finite-dimensional CPT maps and bipartite
//! states, the four quantities whose additivity questions are linked:
//! minimum output entropy, Holevo capacity (free and input-constrained),
//! entanglement of formation, and the strong-superadditivity gap. It also
//! implements the channel↔state correspondence tying constrained capacity to
//! entanglement of formation, the linear-programming dual certificates with
//! feasibility and reconstruction machinery, and the flagged / generalized-
//! Pauli gadget channels used to move additivity statements from one
//! quantity to another.
//!
//! Everything is dense, deterministic per seed, and sized for desk-scale
//! experiments. Search-based quantities are reported as one-sided bounds
//! with re-evaluable witnesses; nothing here certifies global optima.

// dense kernels keep explicit index loops; they mirror the row/column
// arithmetic of the math they implement
#![allow(clippy::needless_range_loop)]

pub mod channels;
pub mod constructions;
pub mod dual;
pub mod error;
pub mod harness;
pub mod msw;
pub mod qmat;
pub mod quantities;
pub mod tol;

pub use error::{Error, Result};
