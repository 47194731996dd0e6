//! Polytope approximation of convex bodies through support and projection
//! oracles: greedy δ-nets on outer parallel bodies, intrinsic-volume
//! estimation, and the shape constants governing facet-count bounds.

pub mod approx;
pub mod bodies;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod net;
pub mod polytope;
pub mod rng;
pub mod shape;
pub mod volumes;

pub use bodies::{sample_unit_directions, ConvexBody, ConvexBodySpec, OuterBoundaryPoint};
pub use error::{Error, Result};
pub use linalg::Points;
pub use polytope::{HPolytope, Halfspace};
