//! Numerical laboratory for non-expansive mappings on convex bodies: flat
//! collapses and tent perturbations with certified Lipschitz bounds, gauge
//! functions with concave-majorant pairing, and porosity testers.

// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gauge;
pub mod harness;
pub mod mapping;
pub mod perturb;
pub mod porosity;
pub mod rng;
pub mod space;

pub use error::{Error, Result};
