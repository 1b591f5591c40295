//! Gauge functions, their inverses, concave majorants, pairs and ladders.

mod form;
mod ladder;
mod majorant;
mod pair;

pub use form::{gauge_k, Gauge, GaugeForm, PiecewiseLinear, BISECTION_MAX_ITER, BISECTION_TOL};
pub use ladder::{
    ladder, select_j, select_j_extending, Ladder, Selection, DEFAULT_LADDER_TOL, DEFAULT_RUNGS,
};
pub use majorant::least_concave_majorant;
pub use pair::{build_pair, log_grid, GaugePair, PairBranch, PairCheck, PAIR_GRID};
