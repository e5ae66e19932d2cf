//! Stable laws, the truncated triangular array built from them, the cocycles
//! realized over a full shift, and the statistics used to check their
//! partial-sum processes against α-stable Lévy motion.
//!
//! The crate is `no_std` (it needs `alloc`). Randomness is always passed in as
//! a value; nothing here touches global state, so every operation is safe to
//! run concurrently. Parallel execution and file formats live in the companion
//! CLI crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod cocycle;
pub mod error;
pub mod process;
pub mod quad;
pub mod rng;
pub mod stable_core;
pub mod triangular_array;
pub mod verify;

pub use error::{Error, Result};
pub use stable_core::{StableParams, TruncationWindow};

/// Crate version, embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
