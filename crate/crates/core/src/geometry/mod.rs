//! Mirror maps, Bregman divergences, feasible sets and the constrained
//! mirror descent step.

mod feasible;
mod mirror;
mod step;

pub use feasible::{project, FeasibleSet};
pub use mirror::{bregman, MirrorMap};
pub use step::{mirror_descent_step, validate_step_size, FEASIBILITY_TOL};
