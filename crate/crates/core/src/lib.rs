//! Numerical toolkit for thermodynamic formalism on finite Markov shifts
//! with group-valued skew-product extensions.
//!
//! The crate computes Gurevič pressure and Gibbs measures through transfer
//! matrices, locates the pressure-minimizing twist ξ of a lattice cocycle,
//! evaluates group-constrained periodic-orbit and preimage sums (by sparse
//! dynamic programming, torus quadrature or a free-group radial recursion),
//! and produces weighted-equidistribution and large-deviation diagnostics.
//! A truncation family of countable-state systems with closed-form tail
//! sums exercises the same pipeline on growing alphabets.
//!
//! Modules follow the pipeline order:
//!
//! - [`shift`]: finite Markov shifts, words, locally constant potentials,
//!   and the brute-force periodic-orbit enumerator every other module's
//!   tests check against.
//! - [`groups`]: ℤ^d, free, Heisenberg and cyclic group arithmetic,
//!   word-length balls and abelianization maps.
//! - [`transfer`]: (possibly complex-twisted) transfer matrices, Perron
//!   eigendata, pressure and Gibbs measures.
//! - [`skew`]: constrained partition sums for skew products and the
//!   extension-pressure, local-limit and ℓ²-growth estimators.
//! - [`xi`]: the pressure function 𝔭(w), its exact gradient, and the
//!   minimizer ξ.
//! - [`equidist`]: weighted empirical measures over constrained orbit
//!   families and large-deviation tails.
//! - [`bip`]: truncation families with closed-form tail bounds.
//! - [`config`]: the line-oriented configuration grammar shared by the
//!   CLI and the test corpus.
//! - [`report`]: deterministic CSV/JSON emission and run manifests.

#![forbid(unsafe_code)]
// indexed loops mirror the matrix notation throughout
#![allow(clippy::needless_range_loop)]

pub mod bip;
pub mod config;
pub mod equidist;
pub mod exec;
pub mod groups;
pub mod report;
pub mod shift;
pub mod skew;
pub mod transfer;
pub mod xi;

mod error;

pub use error::{Error, Result};
