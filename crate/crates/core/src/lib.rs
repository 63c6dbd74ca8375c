//! Extragradient methods for monotone variational inequalities, with
//! accelerated smooth minimization, box-simplex games, and randomized
//! coordinate acceleration built on top of them.

pub mod boxsimplex;
pub mod error;
pub mod geometry;
pub mod operators;
pub mod problems;
pub mod rng;
pub mod solvers;
pub mod verify;

pub use error::{Error, Result};
