//! Bound states of the hydrogen-like radial problem with an additional
//! inverse-quartic repulsion, `V(r) = A/r^4 - Z/r`.
//!
//! Two independent eigenvalue solvers are provided: direct shooting between
//! the two asymptotic regions, and a connection construction built from
//! Floquet (Laurent) solutions. Exact polynomial conditions locate the
//! parameter values at which the wave function becomes elementary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod floquet;
pub mod model;
pub mod ode;
pub mod quasipoly;
pub mod reference;
pub mod roots;
pub mod series;
pub mod shooting;

pub use error::{Error, Result};
pub use model::{derive_exponents, Energy, Exponents, ProblemParams};

/// Version of this library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
