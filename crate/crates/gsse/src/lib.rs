//! Monte Carlo trajectory simulator for Gaussian colored-noise stochastic
//! Schrodinger equations.
//!
//! The crate samples engineered pairs of noise correlations, propagates
//! non-Markovian trajectories under them, and runs the statistical
//! experiments that decide whether an ensemble admits a time-continuous
//! measurement reading: martingale branching tests on the squared norm,
//! master-equation comparisons, correlation-swap equivalence, convergence
//! studies, and empirical noise validation. Start with the `examples/`
//! directory for end-to-end usage; the `runner` module exposes the same
//! experiments as a batch command-line tool.

pub mod ensemble;
pub mod linalg;
pub mod noise;
pub mod oracles;
pub mod rng;
pub mod runner;
pub mod sse;
