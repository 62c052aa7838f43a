//! Optimal and stable orientation-based shape descriptors for continuously
//! moving planar point sets.
//!
//! Three descriptors are supported: the first principal component, the
//! minimum-area oriented bounding box and the thinnest covering strip. Each
//! is the orientation minimizing a cost; [`solvers`] finds that optimum per
//! frame, [`tracker`] follows it continuously through discrete flips, and
//! [`chasing`] follows the diametrical pair with a bounded rotation speed.
//! [`scenarios`] generates adversarial motions and [`analysis`] measures
//! stability ratios and re-checks the closed-form bounds numerically.

pub mod analysis;
pub mod chasing;
pub mod costs;
pub mod error;
pub mod geometry;
pub mod io;
pub mod numeric;
pub mod scenarios;
pub mod solvers;
pub mod tracker;

pub use costs::{cost, cost_obb, cost_pc, cost_strip, CostValue, DescriptorKind};
pub use error::{Error, Result};
pub use geometry::{
    convex_hull, diametric_box, extent, DiametricBox, Frame, Keyframe, Orientation, Point,
    Trajectory,
};
pub use solvers::{optimal, optimal_obb, optimal_pc, optimal_strip, OptimalDescriptor};
