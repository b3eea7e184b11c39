//! Ferromagnetic Potts and general q-spin models on random Δ-regular graphs.
//!
//! The crate is organised by subsystem:
//!
//! * [`spinsys`]: interaction matrices, signature classification, Cholesky factors.
//! * [`treefix`]: tree-recursion fixpoints, Jacobian/Hessian stability, Potts thresholds.
//! * [`moments`]: first/second-moment exponents, induced matrix norms, exact finite-n
//!   moments, the Potts phase diagram and small-subgraph-conditioning constants.
//! * [`graphs`]: pairing-model graphs, cycle counts, exact Gibbs oracles, gadgets.
//! * [`swsim`]: Swendsen-Wang dynamics, exact kernels and conductance.
//! * [`verify`]: the acceptance criteria, runnable from tests and the CLI.
//!
//! Data-parallel loops go through [`Exec`]; with the `parallel` feature disabled every
//! loop runs sequentially and produces identical results.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod graphs;
pub mod moments;
pub mod rng;
pub mod spinsys;
pub mod swsim;
pub mod treefix;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
pub use spinsys::{InteractionMatrix, Phase, Signature};
