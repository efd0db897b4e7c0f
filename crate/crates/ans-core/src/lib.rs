//! Core of a deterministic 2D navigation stack.
//!
//! The crate simulates a differential-drive-style agent on a planar occupancy
//! grid and provides the full modular pipeline on top of it: noisy actuation
//! and odometry, egocentric range-scan mapping with geocentric aggregation,
//! alignment-based pose correction, fast-marching path planning, frontier
//! exploration, and episode runners for exploration and point-goal tasks.
//!
//! Everything here is pure computation over `alloc` containers; the crate is
//! `no_std`-compatible so the algorithms can be embedded or fuzzed without
//! dragging in I/O. File formats, the CLI, and rendering live in the
//! companion `ans-cli` crate.
//!
//! Determinism is a hard requirement throughout: all randomness flows from
//! explicit ChaCha20 streams, and every operation is reproducible bit-for-bit
//! given the same inputs and seeds.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod episode;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod mapping;
pub mod noise;
pub mod planner;
pub mod policy;
pub mod slam;
pub mod world;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
