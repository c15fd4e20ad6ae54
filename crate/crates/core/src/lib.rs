//! Exact combinatorics of the extended affine symmetric group, windowed
//! lattice models for affine flags, and the matrix constructions linking
//! nilpotent orbits to those flags.

pub mod affine_weyl;
pub mod bott_samelson;
pub mod circular;
pub mod cli;
pub mod cyclic_quiver;
pub mod error;
pub mod field;
pub mod lattice;
pub mod lusztig_phi;
pub mod sample;
pub mod wiring;

pub use error::{Error, Result};
