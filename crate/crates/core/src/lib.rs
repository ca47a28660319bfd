//! Constructions and numerical probes for minimal dynamical systems.
//!
//! The crate builds the classical examples (irrational rotations, Denjoy
//! blow-ups, suspension flows over Cantor systems, skew products on the torus
//! and their Klein-bottle quotients) together with finite-stage blow-up
//! extensions whose fibers are intervals of directions or towers of a crooked
//! interval map. Every property the constructions are supposed to have is
//! exposed as a checkable function: orbit density, fiber structure, fiber
//! diameter decay, noninvertibility, slope transport, quotient equivariance,
//! product non-minimality and lattice tiling rigidity.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup;
pub mod circle;
pub mod dynamics;
pub mod error;
pub mod pseudoarc;
pub mod rigidity;
pub mod skew;
pub mod suspension;

pub use error::{Error, Result};

/// Tolerance used for point equality on the circle and torus.
pub const POINT_TOL: f64 = 1e-12;
