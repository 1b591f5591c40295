//! Finite-dimensional normed spaces, convex bodies and separated nets.

mod body;
mod index;
mod net;
mod norm;
mod point;

pub use body::{diameter, ConvexBody, Shape, HULL_TOL, MAX_REJECTION_ATTEMPTS};
pub use index::SpatialIndex;
pub use net::{grid_candidates, greedy_net, lattice_net, sampled_candidates, Net};
pub use norm::{norm_eval, Norm};
pub use point::{segment_point, Point};

