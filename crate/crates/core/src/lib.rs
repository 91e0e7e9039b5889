//! Chebyshev collocation solver for feedback Nash equilibria of a
//! multi-region pollution game.
//!
//! - [`cheb1d`] and [`chebnd`]: interpolation, coefficients and batched evaluation
//! - [`game`]: the model
//! - [`solver`]: value iteration over blocks of state nodes
//! - [`oracle`]: the exact linear-quadratic reference for two players

pub mod cheb1d;
pub mod chebnd;
pub mod error;
pub mod game;
pub mod oracle;
pub mod presets;
pub mod solver;

pub use error::{Error, Result};
pub use game::{GameSpec, StateGrid, TimePath};
pub use solver::{solve, solve_with, EquilibriumResult, Execution, PolicyField, ValueField};
