//! Discrete Monge-Ampère toolkit in the Alexandrov (subdifferential
//! measure) sense.
//!
//! The crate solves the Dirichlet problem for the Monge-Ampère measure of
//! piecewise-linear convex functions on convex polytopal domains, certifies
//! the explicit cylinder barrier functions behind the sharp boundary
//! estimates, and drives the regularity experiments (maximum-principle
//! margins, Hölder exponent fits, dist-weighted Sobolev integrals and their
//! critical-exponent divergence).

pub mod error;
pub mod exec;
pub mod barriers;
pub mod convexfn;
pub mod geometry;
pub mod io;
pub mod regularity;
pub mod solver;
pub(crate) mod vecmath;

pub use error::{Error, Result};
