//! Non-expansive mapping expressions, Lipschitz certificates and sampling estimators.

mod estimate;
mod expr;
mod random;

pub use estimate::{
    lip_global_est, lip_local_from, lip_local_scale, local_candidates, r_set_density,
    resolvable, sup_dist_est, LipEstimate, PAIR_RESOLUTION, SHELL_LEVELS,
};
pub use expr::{flat_bound, flat_rescale, Centers, MapExpr, MEMBERSHIP_TOL};
pub use random::{random_nonexpansive, GeneratorConfig, NodeWeights};
