//! Simulation and covariance tools for the randomized Karlin occupancy
//! scheme: box weights, the discrete and Poissonized urns, limiting Gaussian
//! kernels, and a Monte Carlo harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod kernels;
pub mod montecarlo;
pub mod poisson;
pub mod rng;
pub mod series;
pub mod special;
pub mod urn;
pub mod verify;
pub mod weights;

pub use error::{KarlinError, Result};
pub use weights::{gamma_one_minus_alpha, make_weights, WeightSequence};
