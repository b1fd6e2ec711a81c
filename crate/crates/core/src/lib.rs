//! Numerical toolkit for observability and controllability constants of
//! (fractional) Schrödinger and Grushin heat equations.
//!
//! Everything here is `no_std` + `alloc`; file formats and the command line
//! live in the `grushinlab` binary crate.

#![no_std]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;

pub mod constants;
pub mod control_sets;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod grushin;
pub mod operator;
pub mod potential;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Boundary, Grid};
pub use operator::{discretize, DiscreteOperator, LinearOperator, PotentialField};
pub use potential::{make_power_potential, make_table_potential, Assumption, GrowthParams, PotentialSpec};
pub use spectral::{eigensolve, semigroup_apply, spectral_project, EigenRequest, SpectralData};
