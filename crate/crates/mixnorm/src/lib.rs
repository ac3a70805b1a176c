//! Weighted mixed-norm function-space toolkit.
//!
//! Computes mixed-norm Lebesgue/Sobolev/Besov norms on truncated boxes,
//! weighted Hardy inequalities with their sharp constants, mollifier
//! smoothing, the dyadic vertical partition of unity, the boundary-to-half-
//! space extension operator built from it, and the boundary trace — together
//! with a campaign harness that verifies every inequality empirically on a
//! registry of analytic test functions.

pub mod cli;
pub mod error;
pub mod exponent;
pub mod family;
pub mod hardy;
pub mod harness;
pub mod norms;
pub mod quadrature;
pub mod report;
pub mod runconfig;
pub mod smoothing;
pub mod stepfn;

pub use error::{Error, Result};
pub use exponent::{smoothness_order, ExponentConfig};
pub use family::{Domain, Family, FunctionHandle};
pub use quadrature::QuadratureSpec;
