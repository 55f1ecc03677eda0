//! Neural constraint satisfaction for weighted CNF.
//!
//! Two sigma-pi architectures search for assignments that satisfy
//! penalty-weighted CNF constraints: a symmetric energy-minimization network
//! ([`consyn`]) and a recurrent feedforward network with a feedback copy loop
//! ([`consrnn`]). Both improve with unsupervised practicing: solving problem
//! instances from a shared constraint domain while carrying learned weights
//! from one instance to the next.
//!
//! The [`blockworld`] module grounds a bounded block-stacking planning domain
//! into weighted CNF, and [`harness`] runs the practicing protocol and
//! measures the speedup on held-out test instances.

pub mod blockworld;
pub mod cnf;
pub mod consrnn;
pub mod consyn;
pub mod error;

pub use error::{Error, Result};
