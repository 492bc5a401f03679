//! Simulator and analysis library for compressed distributed Nash equilibrium
//! seeking over gossip networks.
//!
//! A set of `n` agents, connected by an undirected graph with a doubly
//! stochastic mixing matrix, each maintains an estimate of the full joint
//! action profile of a monotone game. Per round every agent broadcasts one
//! compressed difference message to its neighbors and takes a gradient step on
//! its own action block. The crate provides:
//!
//! - [`graph`]: topologies, mixing matrices, spectral gaps;
//! - [`compressors`]: identity, stochastic quantization, top-k, norm-sign
//!   operators with their contraction constants and per-message bit costs;
//! - [`games`]: gradient oracles with known monotonicity/Lipschitz constants
//!   and, where available, closed-form equilibria;
//! - [`engine`]: the synchronous iteration itself, its uncompressed baseline,
//!   and per-iteration traces including cumulative transmitted bits;
//! - [`certify`]: numeric linear-convergence certificates via a 3x3
//!   error-transition matrix and a positive-vector spectral-radius test.
//!
//! All randomness is derived from explicit seeds through counter-based
//! substreams ([`rng`]), so every run, trace, and certificate is reproducible
//! bit for bit.

pub mod certify;
pub mod compressors;
pub mod engine;
pub mod error;
pub mod games;
pub mod graph;
pub mod rng;

pub use error::{Error, Result};
