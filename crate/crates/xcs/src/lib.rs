//! XCS classifier system with evolutionary niche tracking.
//!
//! The crate implements the accuracy-based classifier system XCS — ternary
//! conditions, macroclassifier population, niched steady-state GA — extended
//! with per-classifier action-set time stamps and bounded stamp histories.
//! From those stamps it derives the currently active niches (CAN),
//! historical niche snapshots (CAN_t), the mean active-niche estimate (MAN),
//! and full niche-composition snapshots, so the evolution of niches can be
//! tracked over a run without any knowledge of the problem's solution.
//!
//! Benchmark environments (Boolean multiplexer and majority-on functions,
//! Woods/Maze gridworlds), validation oracles, and a seeded deterministic
//! experiment harness round out the crate; the `xcs-cli` binary drives them.

pub mod classifier;
pub mod condition;
pub mod engine;
pub mod envs;
pub mod error;
pub mod harness;
pub mod niche;
pub mod params;
pub mod population;

pub use classifier::Classifier;
pub use condition::{Bitstring, TernaryCondition};
pub use error::{Error, Result};
pub use params::Parameters;
pub use population::{ClassifierId, Population};
