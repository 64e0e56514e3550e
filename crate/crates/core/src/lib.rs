//! Sliding-puzzle environment engine.
//!
//! The engine models the puzzle as a partially observed control problem:
//! the agent sees a rendering of the state (an image split into patches,
//! a one-hot matrix, or the raw tile vector) and moves tiles with four
//! actions. Alongside the environment it ships exact search oracles and an
//! evaluation harness for success-rate and generalization protocols.

pub mod augment;
pub mod env;
pub mod harness;
pub mod observation;
mod error;
pub mod rng;
pub mod solver;

pub use env::{Action, GridDims, PuzzleState, StepOutcome};
pub use error::{Error, Result};
pub use rng::RandomSource;
