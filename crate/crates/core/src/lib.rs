//! Speed of a random walk among random obstacles, conditioned to cross.
//!
//! A simple random walk on `Z` is killed at each visited site `x` with
//! probability `1 - e^{-V(x)}`. The potential takes the value `M` at
//! obstacles, placed independently with density `p`, and `0` elsewhere.
//! The crate computes crossing probabilities and conditioned crossing
//! times exactly on finite windows, and estimates the asymptotic
//! quenched and annealed speeds.

pub mod annealed;
pub mod environment;
pub mod error;
pub mod estimate;
pub mod exact_walk;
pub mod montecarlo;
mod par;
pub mod quenched;
pub mod seed;
pub mod validate;

pub use environment::{sample_environment, Environment, GapVector, WalkParams};
pub use error::{Error, Result};
pub use estimate::{Method, Moments, SpeedEstimate};
pub use exact_walk::{solve_crossing, CrossingSolution};
