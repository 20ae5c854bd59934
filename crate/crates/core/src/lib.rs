//! Unadjusted Langevin sampling for mixture weakly smooth potentials.
//!
//! Modules, bottom-up: [`pgauss`] (p-generalized Gaussian), [`potential`]
//! (targets and assumption checkers), [`smoothing`] (Monte Carlo smoothed
//! potentials), [`ula`] (chains and step-size planners), [`convexify`]
//! (convex-outside-a-ball constructions) and [`diagnostics`].

pub mod batch;
pub mod convexify;
pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod pgauss;
pub mod potential;
pub mod rng;
pub mod smoothing;
pub mod special;
pub mod ula;

pub use batch::SampleBatch;
pub use error::{Error, Result};
pub use rng::Seed;
