//! Numerical engine for quantum work statistics of finite-dimensional driven
//! systems.
//!
//! The crate builds two-point-measurement work distributions, evaluates their
//! cumulant generating function three independent ways (atom sums, tilted
//! evolution traces, Renyi divergences of the evolved state against the final
//! Gibbs state), and verifies the bound families those identities imply. An
//! explicit battery-and-switch construction reproduces the same statistics
//! from energy changes of a finite ladder, and the resource side evaluates
//! alpha-free-energy second laws against the stochastic quantities.
//!
//! All operators are dense and small (dimension <= 256); every operator
//! function goes through eigendecompositions so the algebraic identities hold
//! to near machine precision. Everything is a pure function of its inputs and
//! safe to evaluate in parallel over parameter grids.

mod linalg;

pub mod battery;
pub mod bridge;
pub mod divergences;
pub mod dynamics;
pub mod error;
pub mod operators;
pub mod random;
pub mod resource;
pub mod scenario;
pub mod workstats;

pub use error::{Error, Result};
