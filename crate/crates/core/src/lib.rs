//! Exact ergodic optimization, involution kernels and twist analysis for
//! locally constant potentials on full shifts.

// Node and edge tables are indexed by graph position throughout.
#![allow(clippy::needless_range_loop)]

pub mod duality;
pub mod error;
pub mod genericity;
pub mod lp;
pub mod maxplus;
pub mod pipeline;
pub mod potential;
pub mod rational;
pub mod symbolic;
pub mod thermo;
pub mod transport;
pub mod twist;

pub use error::{Error, Result};
pub use rational::Q;
