//! Pseudo-spectral Galerkin solver for incompressible generalized-Newtonian
//! flow on the periodic torus, with energy and stopping-time diagnostics.

pub mod basis;
pub mod commands;
pub mod config;
pub mod diagnostics;
pub mod error;
mod fftn;
pub mod integrator;
pub mod io;
pub mod quadrature;
pub mod rhs;
pub mod sweep;
pub mod viscosity;

pub use error::{Error, Result};
