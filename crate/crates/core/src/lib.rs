//! Pinching-antenna system simulator and optimizer.
//!
//! The crate is `no_std` (it needs `alloc`) and contains every numeric piece of
//! the toolkit: scenario geometry, line-of-sight propagation over waveguide-fed
//! pinching antennas, rate models (OMA, two-user NOMA, multi-waveguide SINR),
//! exact and coordinate search with evaluation accounting, a small MLP engine,
//! the learning agents built on it, and the edge-AI co-simulations.
//!
//! File formats, the run harness and the command line live in `pinch-sim`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod agents;
pub mod edgeai;
pub mod error;
pub mod geometry;
pub mod neural;
pub mod presets;
pub mod propagation;
pub mod rates;
pub mod rng;
pub mod scenario;
pub mod search;

pub use error::{Error, Result};
pub use geometry::Point3;
