#![cfg_attr(not(feature = "std"), no_std)]

//! Symbolic verification engine for almost twisted Poisson geometry.
//!
//! Coefficients are closed-form complex expressions over a single real
//! coordinate chart. Every identity is checked by exact symbolic
//! differentiation followed by randomized point evaluation, so a passing
//! check is strong evidence rather than a proof.
//!
//! The crate is `no_std` (with `alloc`). The `parallel` feature pulls in
//! `std` and `rayon` for the quadrature inner product.
//!
//! Module map:
//!
//! * [`symexpr`]: expression trees, evaluation, derivatives, sampling.
//! * [`tensorcalc`]: forms, multivector fields and their brackets.
//! * [`twisted`]: structure validation, twisted bracket, coboundary.
//! * [`prequantum`]: contravariant derivatives, curvature, certificates.
//! * [`polarize`]: polarizations, observables, half-densities, quadrature.
//! * [`catalog`]: fixed example structures used by the tests and CLI.
//! * [`random`]: seeded generators for random polynomial test data.

extern crate alloc;

pub mod catalog;
pub mod polarize;
pub mod prequantum;
pub mod random;
pub mod symexpr;
pub mod tensorcalc;
pub mod twisted;

pub use symexpr::{Chart, EquivReport, Expr, Sampler, C64};
pub use tensorcalc::{Form, MultiVector};
pub use twisted::AtpStructure;
