//! Tooling for the randomized reduction from k-Vector-Sum to gap k-Clique.
//!
//! * [`ffield`] exact prime-field arithmetic, the inner product and the block operator `M`.
//! * [`lintest`] linearity testing, Fourier analysis and Hadamard list decoding over `F_q`.
//! * [`vecsum`] k-Vector-Sum instances: generation, brute-force deciding, sumsets.
//! * [`randmap`] the random linear map `g` and its two good-map checks.
//! * [`reduction`] the clique graph: parameter schedule, vertices, non-edges,
//!   planted cliques, `Gamma` construction and witness extraction.
//! * [`cliquesolve`] dense graphs, exact and greedy clique search, graph file formats.

pub mod cliquesolve;
pub mod error;
pub mod ffield;
pub mod lintest;
pub mod randmap;
pub mod reduction;
pub mod rng;
pub mod stats;
pub mod vecsum;

pub use error::{Error, Result};
pub use stats::Fraction;
