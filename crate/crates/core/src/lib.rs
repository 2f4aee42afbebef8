//! Combinatorial modules of the quantum toroidal algebra of gl₂.
//!
//! States are colored box configurations; the Cartan currents act
//! diagonally through factored ℓ-weights and the raising/lowering
//! currents act by delta functions with exactly computed coefficients.
//! The [`engine`] checks every defining relation on finite truncations.

pub mod algebra;
pub mod boxes;
pub mod characters;
pub mod engine;
pub mod families;
pub mod rational;

mod error;

pub use error::Error;
