//! Reaction-diffusion simulation on a 1-D Neumann grid together with the
//! auxiliary fields and explicit constants of the global-existence argument
//! for mass-controlled, quasi-positive systems, each turned into a
//! measured quantity with a pass/fail verdict.
//!
//! Modules, bottom up:
//! - [`grid`]: cell-centred finite volumes, norms, gradients, Hölder moduli
//! - [`models`]: reaction systems and sampling audits of their structure
//! - [`solver`]: IMEX-Euler stepping with positivity control
//! - [`theory`]: closed-form constants, exponents, equilibria, rate fits
//! - [`diagnostics`]: auxiliary fields co-evolved with a run and their checks
//! - [`transform`]: rescaling plus augmentation to exact conservation
//! - [`app`]: configuration, experiment orchestration and output files

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod models;
pub mod solver;
pub mod theory;
pub mod transform;

pub use error::{Error, Result};
