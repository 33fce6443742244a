//! Metropolis-Hastings enhanced variational quantum eigensolver for weighted
//! MaxCut.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: random weighted graphs, the MaxCut and Ising objectives, and
//!   an exhaustive ground-truth solver.
//! - [`qsim`]: a dense statevector simulator for the layered `RY`/`CZ`
//!   ansatz and `ZZ` measurement statistics.
//! - [`vqe`]: finite-difference gradients and plain gradient descent.
//! - [`mcmc`]: the Boltzmann-targeted Metropolis-Hastings chain over circuit
//!   parameters, with its closing gradient-descent phase.
//! - [`analysis`]: accuracy metrics, ensemble aggregation and mixing fits.
//! - [`experiment`]: seeded sweeps that write traces, summaries and manifests.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod mcmc;
pub mod qsim;
pub mod vqe;

pub use error::{Error, Result};
pub use graph::{GroundTruth, VertexAssignment, WeightedGraph};
pub use mcmc::{ChainConfig, ChainTrace, EndpointEvaluation};
pub use qsim::{Ansatz, ParameterVector, Shots, Statevector};
