//! # nelab-core
//!
//! Numerical laboratory for symmetry-induced entanglement in bipartite (and
//! small multipartite) quantum states: the number-entanglement witness,
//! charge-sector twirling, the symmetric-separability decision at small
//! dimension, seeded random-state ensembles, and a Monte-Carlo harness for
//! concentration experiments and chi-distribution fits.
//!
//! Layering, bottom up:
//!
//! - [`linalg`] — dense complex matrices, Kronecker products, partial traces,
//!   a Hermitian Jacobi eigensolver, fidelity and Bures distance;
//! - [`states`] — validated density matrices and pure states, entropies,
//!   purification, the PPT sign test;
//! - [`symmetry`] — charge operators, sector decompositions, nonselective
//!   measurement, and the twirl with its quadrature oracle;
//! - [`witness`] — the number entanglement, the symsep decision pipeline,
//!   and symmetric separable channels;
//! - [`ensembles`] — splittable random streams and the sampler registry;
//! - [`harness`] — experiment configs, distribution statistics, chi fits,
//!   concentration sweeps, and the Lévy-bound diagnostic.
//!
//! All entropies and NE values are in bits. Validation tolerances default to
//! 1e-9 (relative Frobenius).

pub mod ensembles;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod states;
pub mod symmetry;
pub mod witness;

pub use error::{Error, ErrorClass, Result};
