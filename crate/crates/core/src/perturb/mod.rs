//! Flat collapses, direction fields and village perturbations.

mod direction;
mod flat;
mod village;

pub use direction::DirectionField;
pub use flat::{flat_collapse, FlatSpec};
pub use village::{
    net_witnesses, net_witness_beta, net_witness_bound, village_perturb, witness_offset,
    NetWitnesses, Village, VillageSpec, WitnessPair,
};
