//! Hole-size estimation, porosity testers and the witness constructions on the
//! domain side.

mod eset;
mod gamma;
mod oracle;
mod witness;

pub use eset::{e_set_member, ESetParams, ESetReport, DEFAULT_J_MAX};
pub use gamma::{
    dyadic_constants, gamma_est, geometric_grid, lower_porous_at, upper_porous_at, verify_hole,
    HoleWitness, PorosityVerdict, Verdict, DEFAULT_PROBES,
};
pub use oracle::{
    sample_in_ball, ESet, EmptySet, FiniteSet, Rationals, Reciprocals, SetOracle, WholeSet,
};
pub use witness::*;
