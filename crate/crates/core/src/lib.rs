//! Limited-adaptivity linear contextual bandits.
//!
//! Numerical kernel, G-optimal and distributional designs, batch and
//! rarely-switching learners, environment generators, and the experiment harness.

pub mod bandits;
pub mod design;
pub mod dist_design;
pub mod env;
pub mod harness;
pub mod matrix;
pub mod rng;
