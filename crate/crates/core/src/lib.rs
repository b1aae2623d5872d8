//! Simulation and optimization of single-measurement conditional state
//! preparation with two squeezed coherent inputs, a tunable beam splitter
//! and either single-photon detection or homodyne detection on one output.
//!
//! All states live in a truncated Fock space. The closed-form photon-number
//! expansions in [`scheme`] are cross-checked against an explicit
//! tensor/beam-splitter/projection pipeline built from [`fock`] primitives.

pub mod error;
pub mod fock;
pub mod imperfections;
pub mod optimizer;
pub mod quadrature;
pub mod scheme;
pub mod states;
pub mod table;
pub mod tolerances;

pub use error::{Error, Result};
pub use fock::{DensityMatrix, FockVector, Mode, TwoModeState};
pub use num_complex::Complex64;
