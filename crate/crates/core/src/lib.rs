//! Core of an active 3D scene-graph pipeline on synthetic indoor worlds.
//!
//! Everything here is deterministic and allocation-only (`no_std` + `alloc`); file formats,
//! the CLI and experiment output live in the `activesg` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod eval;
pub mod geometry;
pub mod graph;
pub mod math;
pub mod planner;
pub mod rng;
pub mod sensing;
pub mod world;

pub use error::{Error, Result};
