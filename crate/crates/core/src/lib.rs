//! Stabilized finite element solver for the perturbed Oseen and
//! Navier-Stokes equations with equal-order Lagrange elements.

pub mod analysis;
pub mod config;
pub mod elements;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod forms;
pub mod io;
pub mod mesh;
pub mod par;
pub mod solve;
pub mod sparse;

pub use error::{Error, Result};
