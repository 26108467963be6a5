//! Option spanning and order closures of sublattices, computed on finite
//! state spaces and on truncated double sequences.
//!
//! * [`lattice`]: pointwise lattice operations, options, components, band projections.
//! * [`sigma`]: finite sigma-algebras as partitions and the two measurability tests.
//! * [`spanning`]: option spaces, butterflies, exact replication, two-generator sublattices.
//! * [`lab`]: the truncated `l^inf(N x N)` construction separating uo- and order closures.
//! * [`closure`]: closure constructions (uo-to-order bridge, smallest order closed
//!   sublattices, dyadic and monotone approximation).

pub mod closure;
pub mod error;
pub mod expr;
pub mod lab;
pub mod lattice;
pub mod linalg;
pub mod scalar;
pub mod sigma;
pub mod spanning;

pub use error::{LatticeError, Result};
pub use lattice::{LatticeElement, OptionKind, Payoff, StateSpace};
pub use scalar::{Exact, Scalar};
